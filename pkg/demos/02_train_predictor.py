"""Learning the time until a user reaches the blocked area.

Ten thousand random (x, y, speed) points on the 90 m x 15 m street, each
labelled with the exact remaining time, train a small tanh network. The
label is piecewise linear in x and inverse in speed, so a model that only sees
the three raw inputs has to learn both the kink at the blocked area and the
1/v scaling.
"""

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from phosim.predictor import TrainConfig, generate_dataset, predict_batch, r2_score, split, train

OUT = Path(__file__).with_name("out")
OUT.mkdir(exist_ok=True)

ds = generate_dataset(90.0, 15.0, 68.38, n=10_000, rng=np.random.default_rng(0))
tr, va, te = split(ds, (0.8, 0.1, 0.1), seed=0)
print(f"train/val/test = {len(tr)}/{len(va)}/{len(te)}; labels {ds.labels.min():.2f}..{ds.labels.max():.2f} s")

net, hist = train(tr, va, TrainConfig(seed=0))
pred = predict_batch(net, te.features, warn=False)
print(f"R2 = {r2_score(te.labels, pred):.5f}, MAE = {np.mean(np.abs(pred - te.labels)) * 1000:.1f} ms")

fig, ax = plt.subplots(1, 2, figsize=(9, 3.5))
ax[0].semilogy(hist.epoch, hist.train_mse, label="train")
ax[0].semilogy(hist.epoch, hist.val_mse, label="validation")
ax[0].set_xlabel("epoch")
ax[0].set_ylabel("MSE (s$^2$)")
ax[0].legend()

# one slice through the learned surface: y = 9, 30 mph
x = np.linspace(0, 90, 200)
X = np.column_stack([x, np.full_like(x, 9.0), np.full_like(x, 13.4112)])
ax[1].plot(x, np.maximum(0, 68.38 - x) / 13.4112, "k--", label="exact")
ax[1].plot(x, predict_batch(net, X, warn=False), label="network")
ax[1].set_xlabel("x (m)")
ax[1].set_ylabel("time to blocked area (s)")
ax[1].legend()
fig.tight_layout()
fig.savefig(OUT / "predictor.svg")
print("wrote", OUT / "predictor.svg")
