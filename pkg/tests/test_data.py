import numpy as np
import pytest

from gossipbet.data import (
    AgentStreams,
    LibsvmParseError,
    Sample,
    SyntheticConfig,
    absolute_loss,
    absolute_loss_subgradient,
    distribute_rounds,
    format_libsvm,
    generate_synthetic,
    loss_matrix,
    parse_libsvm,
)


def make_streams(**kw):
    defaults = dict(n_agents=4, horizon=50, dim=6, seed=3)
    defaults.update(kw)
    return generate_synthetic(SyntheticConfig(**defaults))


# ---------------------------------------------------------------- synthetic


def test_synthetic_unit_norm_features():
    _, streams = make_streams(heterogeneity_sigma=2.0)
    norms = np.linalg.norm(streams.features, axis=2)
    assert np.allclose(norms, 1.0, atol=1e-9)


def test_synthetic_deterministic():
    u1, s1 = make_streams()
    u2, s2 = make_streams()
    assert np.array_equal(u1, u2)
    assert np.array_equal(s1.features, s2.features)
    assert np.array_equal(s1.labels, s2.labels)


def test_synthetic_homogeneous_noise_free():
    u, streams = make_streams(label_noise_sigma=0.0, heterogeneity_sigma=0.0)
    # all agents see the same sample, and labels are exact inner products
    assert np.allclose(streams.features, streams.features[:, :1, :], atol=0)
    assert np.allclose(streams.labels, streams.features @ u, atol=1e-12)


def test_synthetic_validation():
    with pytest.raises(ValueError):
        SyntheticConfig(n_agents=2, horizon=10, dim=0)
    with pytest.raises(ValueError):
        SyntheticConfig(n_agents=2, horizon=10, label_noise_sigma=-0.1)


def test_streams_round_accessor():
    _, streams = make_streams()
    feats, labels = streams.round(1)
    assert feats.shape == (4, 6) and labels.shape == (4,)
    assert np.array_equal(feats, streams.features[0])


# ---------------------------------------------------------------- libsvm parsing


def write(tmp_path, text):
    path = tmp_path / "data.libsvm"
    path.write_text(text)
    return path


def test_parse_normalizes_three_four_five(tmp_path):
    samples = parse_libsvm(write(tmp_path, "2.5 1:3 3:4\n"))
    assert samples[0].label == 2.5
    assert np.allclose(samples[0].features, [0.6, 0.0, 0.8], atol=1e-15)


def test_parse_dim_hint(tmp_path):
    samples = parse_libsvm(write(tmp_path, "-1 2:1\n"), dim_hint=3)
    assert samples[0].label == -1.0
    assert np.array_equal(samples[0].features, [0.0, 1.0, 0.0])


def test_parse_bad_token_names_line(tmp_path):
    with pytest.raises(LibsvmParseError, match="line 1"):
        parse_libsvm(write(tmp_path, "1 1:x\n"))


def test_parse_bad_label_names_line(tmp_path):
    with pytest.raises(LibsvmParseError, match="line 2"):
        parse_libsvm(write(tmp_path, "1 1:2\nabc 1:2\n"))


def test_parse_non_ascending_indices(tmp_path):
    with pytest.raises(LibsvmParseError, match="ascending"):
        parse_libsvm(write(tmp_path, "1 2:1 1:2\n"))
    with pytest.raises(LibsvmParseError, match="ascending"):
        parse_libsvm(write(tmp_path, "1 0:1\n"))  # 1-based


def test_parse_empty_file(tmp_path):
    with pytest.raises(LibsvmParseError, match="no samples"):
        parse_libsvm(write(tmp_path, "\n\n"))


def test_parse_dim_hint_too_small(tmp_path):
    with pytest.raises(LibsvmParseError, match="exceeds"):
        parse_libsvm(write(tmp_path, "1 5:2\n"), dim_hint=3)


def test_parse_zero_row_flagged(tmp_path):
    with pytest.warns(UserWarning, match="all-zero"):
        samples = parse_libsvm(write(tmp_path, "1 1:1\n2\n"), dim_hint=1)
    assert np.array_equal(samples[1].features, [0.0])


def test_parse_format_round_trip(tmp_path, rng):
    lines = []
    for _ in range(20):
        idxs = sorted(rng.choice(range(1, 9), size=int(rng.integers(1, 5)), replace=False))
        pairs = " ".join(f"{i}:{rng.normal():.3f}" for i in idxs)
        lines.append(f"{rng.normal():.3f} {pairs}")
    first = parse_libsvm(write(tmp_path, "\n".join(lines) + "\n"), dim_hint=8)
    second = parse_libsvm(write(tmp_path, format_libsvm(first)), dim_hint=8)
    for a, b in zip(first, second):
        assert a.label == b.label
        assert np.array_equal(a.features, b.features)


# ---------------------------------------------------------------- dealing


def unit(v):
    return np.asarray(v, dtype=float) / np.linalg.norm(v)


def test_distribute_exact_deal():
    samples = [Sample(unit([i + 1, 1]), float(i)) for i in range(4)]
    streams = distribute_rounds(samples, n_agents=2, horizon=2, seed=0)
    assert sorted(streams.labels.ravel().tolist()) == [0.0, 1.0, 2.0, 3.0]


def test_distribute_cycles_when_short():
    samples = [Sample(unit([i + 1, 1]), float(i)) for i in range(3)]
    streams = distribute_rounds(samples, n_agents=2, horizon=2, seed=0)
    labels = streams.labels.ravel().tolist()
    assert len(labels) == 4 and len(set(labels)) == 3  # one sample reused


def test_distribute_deterministic():
    samples = [Sample(unit([i + 1, 2]), float(i)) for i in range(10)]
    a = distribute_rounds(samples, 3, 5, seed=9)
    b = distribute_rounds(samples, 3, 5, seed=9)
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)


def test_distribute_empty():
    with pytest.raises(ValueError):
        distribute_rounds([], 2, 2, seed=0)


# ---------------------------------------------------------------- loss


def test_absolute_loss_values():
    z = unit([1.0, 0.0])
    assert absolute_loss(np.zeros(2), Sample(z, 2.0)) == 2.0
    assert absolute_loss(np.array([1.0, 0.0]), Sample(unit([0.6, 0.8]), 1.0)) == pytest.approx(
        0.4, abs=1e-15
    )


def test_absolute_loss_exact_model():
    u, streams = make_streams(label_noise_sigma=0.0)
    feats, labels = streams.round(3)
    for n in range(streams.n_agents):
        assert absolute_loss(u, Sample(feats[n], labels[n])) < 1e-12


def test_subgradient_values():
    s = Sample(np.array([1.0, 0.0]), 1.0)
    assert np.array_equal(absolute_loss_subgradient(np.zeros(2), s), [-1.0, 0.0])
    # residual exactly zero: the zero vector is the chosen subgradient
    s0 = Sample(unit([0.6, 0.8]), 0.0)
    assert np.array_equal(absolute_loss_subgradient(np.zeros(2), s0), [0.0, 0.0])


def test_subgradient_norm_at_most_one(rng):
    for _ in range(200):
        z = unit(rng.standard_normal(5))
        s = Sample(z, float(rng.normal()))
        g = absolute_loss_subgradient(rng.standard_normal(5), s)
        assert np.linalg.norm(g) <= 1.0 + 1e-12


def test_subgradient_inequality(rng):
    # loss(y) >= loss(x) + <g(x), y - x> on random triples
    for _ in range(1000):
        dim = int(rng.integers(1, 6))
        z = unit(rng.standard_normal(dim))
        s = Sample(z, float(rng.normal()))
        x, y = rng.standard_normal(dim), rng.standard_normal(dim)
        g = absolute_loss_subgradient(x, s)
        assert absolute_loss(y, s) >= absolute_loss(x, s) + float(g @ (y - x)) - 1e-9


def test_loss_dimension_mismatch():
    s = Sample(np.ones(3) / np.sqrt(3), 0.0)
    with pytest.raises(ValueError):
        absolute_loss(np.zeros(2), s)
    with pytest.raises(ValueError):
        absolute_loss_subgradient(np.zeros(4), s)


def test_loss_matrix_matches_scalar_loss(rng):
    feats = np.stack([unit(rng.standard_normal(4)) for _ in range(5)])
    labels = rng.standard_normal(5)
    decisions = rng.standard_normal((5, 4))
    mat = loss_matrix(decisions, feats, labels)
    for i in range(5):
        for j in range(5):
            assert mat[i, j] == pytest.approx(
                absolute_loss(decisions[i], Sample(feats[j], labels[j])), abs=1e-12
            )
