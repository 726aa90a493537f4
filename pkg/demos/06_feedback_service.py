"""
A feedback session against the scoring service
==============================================

Drives the in-process service through a full loop: train on noisily
labeled data, score users, file human corrections, watch the
confidence gate ignore flags the model is sure about, and see a
retrain fire once enough corrections accumulate. The same object
serves HTTP via `retweetguard serve`; the logic here is identical to
the POST /score and POST /feedback routes.
"""

import numpy as np

from retweetguard.corpus import GENUINE, LabelMap
from retweetguard.models import ModelSpec
from retweetguard.service import ACCEPTED, FeedbackPolicy, ScoringService
from retweetguard.synth import generate, genuine_preset, normal_customer_preset

corpus, true_labels = generate(
    [(genuine_preset(), 40), (normal_customer_preset(), 40)],
    span_days=30, seed=13)

# Corrupt 40% of the labels to play the role of a sloppy first
# annotation pass. The corrupted users drag their neighborhoods across
# the class boundary, which is exactly what human feedback should fix.
rng = np.random.default_rng(0)
noisy = dict(true_labels.by_user)
flipped = rng.choice(sorted(noisy), size=32, replace=False)
for uid in flipped:
    noisy[uid] = "normal" if noisy[uid] == GENUINE else GENUINE

service = ScoringService(
    corpus, LabelMap(by_user=noisy),
    spec=ModelSpec(kind="knn", class_mode="binary", random_seed=7,
                   hyperparameters={"n_neighbors": 7}),
    policy=FeedbackPolicy(confidence_threshold=0.75, retrain_trigger=5))
print(f"model v{service.model_info()['version']} trained on noisy labels")


def accuracy():
    truth = true_labels.binary_view()
    rows = service.score(user_ids=list(corpus.user_ids))
    return np.mean([row["label"] == truth[row["user_id"]] for row in rows])


print(f"agreement with the true labels before feedback: {accuracy():.2f}")

# Score a handful of users, plus one the corpus has never seen.
some_ids = list(corpus.user_ids)[:3] + ["stranger"]
for row in service.score(user_ids=some_ids):
    if "error" in row:
        print(f"  {row['user_id']}: {row['error']}")
    else:
        print(f"  {row['user_id']}: {row['label']} "
              f"(confidence {row['confidence']:.2f})")

# A reviewer who knows the truth walks the corpus and flags every
# wrong prediction. Flags on predictions the model holds with more
# than 0.75 confidence are Ignored (audited, never buffered); the rest
# buffer up until the fifth one triggers a retrain.
truth = true_labels.binary_view()
ignored = 0
for uid in corpus.user_ids:
    row = service.score(user_ids=[uid])[0]
    if row["label"] == truth[uid]:
        continue
    status = service.submit_feedback(uid, predicted_label=row["label"],
                                     corrected_label=truth[uid])
    ignored += status != ACCEPTED
    retrained = service.retrain_if_due() is not None
    print(f"  flag {uid} ({row['label']} at {row['confidence']:.2f}): {status}"
          + ("  -> retrained" if retrained else ""))

info = service.model_info()
print(f"model version {info['version']}; {ignored} flags gated off; "
      f"buffer holds {service.buffer_size} not yet consumed")
print(f"agreement with the true labels after feedback: {accuracy():.2f}")
