"""Training on blurred tiles helps on blurred tiles.

Trains two small logistic feature models, one on sharp tiles and one on
tiles blurred at sigma 0.5, then evaluates both on sharp and on heavily
blurred validation tiles. The sharp-trained model wins in focus; the
blur-trained model wins out of focus. Run:

    python demos/04_blur_trained_models.py
"""

from blurmm import (
    CorpusSpec,
    auc,
    cv_split,
    feature_predict,
    gaussian_blur,
    gen_corpus_arrays,
    train_feature_model,
)

SEED = 2

# --- Corpus and slide-level split --------------------------------------
# Splitting at the slide level keeps all of a slide's tiles on one side,
# the same discipline used for patient-level splits in pathology.
spec = CorpusSpec(n_slides=40, tiles_per_slide=12)
records, rasters = gen_corpus_arrays(spec, SEED)
slide_ids = sorted({r.slide_id for r in records})
labels = {r.slide_id: r.label for r in records}
split = cv_split(slide_ids, [labels[s] for s in slide_ids], 5, SEED)
fold = split.folds[0]
train_slides = set(fold.train) | set(fold.tuning)
val_slides = set(fold.validation)

train = [(r, x) for r, x in zip(records, rasters) if r.slide_id in train_slides]
val = [(r, x) for r, x in zip(records, rasters) if r.slide_id in val_slides]
print(f"{len(train)} training tiles, {len(val)} validation tiles")

# --- Two models, two training blur levels ------------------------------
sharp_model = train_feature_model([r for r, _ in train], [x for _, x in train], 0.0)
blur_model = train_feature_model([r for r, _ in train], [x for _, x in train], 0.5)

# --- Evaluate both under increasing test blur --------------------------
val_labels = [r.label for r, _ in val]
print("\neval sigma   sharp-trained  blur-trained")
for eval_sigma in (0.0, 1.0, 2.0, 3.0):
    blurred = [gaussian_blur(x, eval_sigma) for _, x in val]
    a_sharp = auc(val_labels, [feature_predict(b, sharp_model) for b in blurred])
    a_blur = auc(val_labels, [feature_predict(b, blur_model) for b in blurred])
    print(f"{eval_sigma:10.1f}   {a_sharp:.3f}          {a_blur:.3f}")
