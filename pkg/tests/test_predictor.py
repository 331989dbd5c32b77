import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phosim.errors import ConfigError
from phosim.predictor import (DEFAULT_SPEEDS_MPS, Adam, Dataset, InputClampedWarning, MetricError,
                              ModelError, TrainConfig, TrainingError, generate_dataset, init_net,
                              load_model, loss_and_grads, oracle_time, predict, predict_batch,
                              r2_score, r_squared, save_model, split, train)

L, W, XB = 90.0, 15.0, 68.38


def small_net(rng, sizes=(3, 5, 4, 1)):
    net = init_net(sizes, np.zeros(3), np.ones(3), 0.0, 1.0, rng)
    for b in net.biases:
        b += rng.normal(0, 0.3, b.shape)
    return net


def numeric_grads(net, Xs, yn, h=1e-6):
    out = []
    for p in net.params:
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            keep = p[idx]
            p[idx] = keep + h
            up, _ = loss_and_grads(net, Xs, yn)
            p[idx] = keep - h
            down, _ = loss_and_grads(net, Xs, yn)
            p[idx] = keep
            g[idx] = (up - down) / (2 * h)
        out.append(g)
    return out


def max_rel_error(a, b):
    num = max(float(np.max(np.abs(x - y))) for x, y in zip(a, b))
    den = max(float(np.max(np.abs(x) + np.abs(y))) for x, y in zip(a, b))
    return num / max(den, 1e-12)


# -- labels -----------------------------------------------------------------------

def test_oracle_examples():
    # 22 m before the blocked area at 30 mph
    assert oracle_time(XB - 22.0, 13.4112, XB) == pytest.approx(22.0 / 13.4112)
    assert oracle_time(XB - 22.0, 13.4112, XB) == pytest.approx(1.64, abs=0.005)
    assert oracle_time(XB + 1.0, 5.0, XB) == 0.0
    assert oracle_time(XB + 10.0, 5.0, XB, direction=-1) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        oracle_time(0.0, 0.0, XB)


def test_dataset_shape_and_labels():
    ds = generate_dataset(L, W, XB, n=500, rng=np.random.default_rng(0))
    assert ds.features.shape == (500, 3) and len(ds) == 500
    assert np.all(ds.labels >= 0)
    assert np.all((ds.features[:, 0] >= 0) & (ds.features[:, 0] <= L))
    assert np.all((ds.features[:, 1] >= 0) & (ds.features[:, 1] <= W))
    assert set(np.round(ds.features[:, 2], 9)) <= set(np.round(DEFAULT_SPEEDS_MPS, 9))
    assert ds.labels == pytest.approx(oracle_time(ds.features[:, 0], ds.features[:, 2], XB))
    s = ds[3]
    assert s.t_to_blk == ds.labels[3] and s.x == ds.features[3, 0]


def test_dataset_errors():
    with pytest.raises(ValueError):
        generate_dataset(L, W, XB, n=0)
    with pytest.raises(ValueError):
        generate_dataset(L, W, XB, n=5, speeds=[])


def test_dataset_mean_label_monte_carlo():
    # x ~ U(0, L): E[(XB - x)+] = XB^2 / (2L), speed independent and uniform over the set
    n = 40000
    ds = generate_dataset(L, W, XB, n=n, rng=np.random.default_rng(11))
    inv_v = np.mean([1.0 / v for v in DEFAULT_SPEEDS_MPS])
    expect = XB ** 2 / (2 * L) * inv_v
    se = ds.labels.std() / math.sqrt(n)
    assert abs(ds.labels.mean() - expect) < 4 * se


def test_dataset_csv_round_trip(tmp_path):
    ds = generate_dataset(L, W, XB, n=50, rng=np.random.default_rng(1))
    p = tmp_path / "d.csv"
    ds.to_csv(p)
    back = Dataset.from_csv(p)
    assert np.array_equal(back.features, ds.features) and np.array_equal(back.labels, ds.labels)
    assert p.read_text().splitlines()[0] == "x_m,y_m,speed_mps,t_to_blk_s"
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        Dataset.from_csv(bad)


def test_split_disjoint_and_sized():
    ds = generate_dataset(L, W, XB, n=1000, rng=np.random.default_rng(2))
    tr, va, te = split(ds, (0.8, 0.1, 0.1), seed=3)
    assert (len(tr), len(va), len(te)) == (800, 100, 100)
    rows = {tuple(r) for part in (tr, va, te) for r in part.features}
    assert len(rows) == 1000
    again = split(ds, (0.8, 0.1, 0.1), seed=3)
    assert np.array_equal(again[0].features, tr.features)
    for bad in ((0.8, 0.2, 0.1), (0.5, 0.5), (1.2, -0.1, -0.1)):
        with pytest.raises(ConfigError):
            split(ds, bad)


# -- network ----------------------------------------------------------------------

@pytest.mark.parametrize("trial", range(5))
def test_gradient_check(trial):
    rng = np.random.default_rng(100 + trial)
    net = small_net(rng)
    Xs = rng.uniform(-1, 1, (7, 3))
    yn = rng.normal(size=7)
    _, grads = loss_and_grads(net, Xs, yn)
    assert max_rel_error(grads, numeric_grads(net, Xs, yn)) <= 1e-4


def test_adam_first_step():
    # from zero moments the bias-corrected first step is lr * g / (|g| + eps)
    p = [np.array([1.0, -2.0, 0.5])]
    g = [np.array([0.3, -4.0, 0.0])]
    opt = Adam(p, lr=0.1)
    opt.step(p, g)
    expect = np.array([1.0, -2.0, 0.5]) - 0.1 * np.array([0.3, -4.0, 0.0]) / (np.abs(g[0]) + 1e-8)
    assert p[0] == pytest.approx(expect)


def test_adam_minimises_quadratic():
    p = [np.array([3.0, -2.0])]
    opt = Adam(p, lr=0.05)
    for _ in range(2000):
        opt.step(p, [2 * p[0]])
    assert np.abs(p[0]).max() < 1e-2


def test_cosine_schedule():
    cfg = TrainConfig(epochs=5, lr=1e-2, lr_final=1e-4)
    lrs = [cfg.lr_at(e) for e in range(5)]
    assert lrs[0] == pytest.approx(1e-2) and lrs[-1] == pytest.approx(1e-4)
    assert lrs[2] == pytest.approx(0.5 * (1e-2 + 1e-4))
    assert all(a >= b for a, b in zip(lrs, lrs[1:]))
    with pytest.raises(ConfigError):
        TrainConfig(epochs=0)
    with pytest.raises(ConfigError):
        TrainConfig(batch_size=0)


def _quick(seed=0, n=2000, epochs=6):
    ds = generate_dataset(L, W, XB, n=n, rng=np.random.default_rng(seed))
    tr, va, te = split(ds, seed=seed)
    net, hist = train(tr, va, TrainConfig(epochs=epochs, seed=seed))
    return net, hist, te


def test_training_deterministic_and_learns():
    a, ha, te = _quick()
    b, hb, _ = _quick()
    for x, y in zip(a.params, b.params):
        assert np.array_equal(x, y)
    assert ha.train_mse == hb.train_mse
    assert len(ha.epoch) == 6
    assert ha.train_mse[-1] < ha.train_mse[0]
    assert r_squared(a, te) > 0.9


def test_history_csv(tmp_path):
    _, hist, _ = _quick(epochs=3)
    p = tmp_path / "h.csv"
    hist.to_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "epoch,train_mse,val_mse" and len(lines) == 4


def test_training_errors():
    ds = generate_dataset(L, W, XB, n=40, rng=np.random.default_rng(0))
    with pytest.raises(ConfigError):
        train(ds, None, TrainConfig(batch_size=41))
    with pytest.raises(ValueError):
        train(ds.subset(np.arange(0)), None)
    ds.labels[5] = np.nan
    with pytest.raises(TrainingError) as info:
        train(ds, None, TrainConfig(epochs=2))
    assert info.value.epoch == 1


def test_predict_clamps_with_warning():
    net, _, _ = _quick(epochs=1)
    with pytest.warns(InputClampedWarning):
        far = predict(net, 500.0, 9.0, 13.4)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        edge = predict(net, float(net.in_hi[0]), 9.0, 13.4)
    assert far == pytest.approx(edge)


def test_predict_nonfinite_raises():
    net, _, _ = _quick(epochs=1)
    net.weights[-1][:] = np.nan
    with pytest.raises(ModelError):
        predict_batch(net, [[40.0, 9.0, 10.0]])


def test_r2_examples():
    assert r2_score([1, 2, 3], [1, 2, 3]) == 1.0
    assert r2_score([1, 2, 3], [2, 2, 2]) == 0.0
    # SSE 0.5 over SST 2
    assert r2_score([1, 2, 3], [1.5, 2, 2.5]) == pytest.approx(0.75)
    with pytest.raises(MetricError):
        r2_score([1.0], [1.0])
    with pytest.raises(MetricError):
        r2_score([2, 2, 2], [1, 2, 3])


def test_model_round_trip(tmp_path):
    net, _, te = _quick(epochs=1)
    p = tmp_path / "m.bin"
    save_model(net, p)
    back = load_model(p)
    assert back.sizes == net.sizes and back.activation == "tanh"
    for x, y in zip(back.params, net.params):
        assert np.array_equal(x, y)
    assert np.array_equal(predict_batch(back, te.features, warn=False),
                          predict_batch(net, te.features, warn=False))
    raw = p.read_bytes()
    # 8 magic + 2*4 header + 4 sizes*4 + 4 activation + 8 normaliser doubles, then parameters
    n_par = sum(w.size + b.size for w, b in zip(net.weights, net.biases))
    assert len(raw) == 8 + 8 + 16 + 4 + 8 * 8 + 8 * n_par


def test_model_file_errors(tmp_path):
    net, _, _ = _quick(epochs=1)
    p = tmp_path / "m.bin"
    save_model(net, p)
    raw = p.read_bytes()
    for name, data in (("magic", b"XXXX" + raw[4:]), ("short", raw[:-9]), ("long", raw + b"\0")):
        q = tmp_path / name
        q.write_bytes(data)
        with pytest.raises(ModelError):
            load_model(q)


@settings(max_examples=30, deadline=None)
@given(x=st.floats(0, 90), v=st.sampled_from(DEFAULT_SPEEDS_MPS))
def test_oracle_label_properties(x, v):
    t = oracle_time(x, v, XB)
    assert t >= 0
    assert t == pytest.approx(max(0.0, XB - x) / v)
    # faster users reach the blocked area no later
    assert oracle_time(x, v * 1.5, XB) <= t
