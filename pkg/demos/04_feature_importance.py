"""
Which single feature carries the most signal?
=============================================

Cross-validates a linear SVM on every feature alone, on each of the
five families alone, and on the full set, then prints the ranking.
The bot-score column (UAF8) and the follow-graph ratios usually
dominate on synthetic data, mirroring their role on real accounts.
"""

from retweetguard.evaluation import single_feature_importance
from retweetguard.features import build_dataset
from retweetguard.models import ModelSpec
from retweetguard.synth import bot_preset, generate, genuine_preset

# A small corpus keeps the 70 cross-validation runs quick.
corpus, labels = generate([(genuine_preset(), 30), (bot_preset(), 30)],
                          span_days=30, seed=5)
dataset = build_dataset(corpus, labels, mode="binary")

spec = ModelSpec(kind="linear_svm", class_mode="binary", random_seed=7)
rows = single_feature_importance(dataset, spec=spec, k=5)

print(f"{'rank':>4}  {'name':>6}  macro F1")
for rank, (name, f1) in enumerate(rows[:12], start=1):
    print(f"{rank:>4}  {name:>6}  {f1:.3f}")
print(f" ...  ({len(rows)} rows total; families and ALL are ranked "
      "alongside singles)")
