import numpy as np
import pytest

from sqpc import rng as rngmod
from sqpc.adversary import InterceptResend
from sqpc.analysis import detection_rate_mc
from sqpc.protocol import Phase, ProtocolConfig, run_protocol
from sqpc.quantum import BELL_BASIS, FMB_BASIS, available_backends, backend, current_backend, use_backend
from sqpc.quantum.state import gather_indices


def _random_state(dim, seed):
    g = np.random.default_rng(seed)
    v = g.normal(size=dim) + 1j * g.normal(size=dim)
    return v / np.linalg.norm(v)


def test_python_backend_always_available():
    assert "python" in available_backends()


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        use_backend("fortran")


def test_backend_fixture_switches(backend_name):
    assert current_backend() == backend_name


@pytest.mark.skipif("compiled" not in available_backends(), reason="extension not built")
@pytest.mark.parametrize("targets,basis", [((2, 3), BELL_BASIS), ((0, 1, 2, 3), FMB_BASIS),
                                           ((1, 3), BELL_BASIS)])
def test_kernels_agree(targets, basis):
    base, off = gather_indices(4, 2, targets)
    amps = _random_state(32, 11)
    results = {}
    for name in ("python", "compiled"):
        use_backend(name)
        k = backend.kernels
        probs = k.outcome_probabilities(amps, base, off, basis)
        a = amps.copy()
        mat = np.linalg.qr(_random_state(len(off) ** 2, 3).reshape(len(off), len(off)))[0]
        k.apply_matrix(a, base, off, np.ascontiguousarray(mat))
        b = amps.copy()
        outcome = k.measure(b, base, off, basis, 0.61, 1e-12)
        results[name] = (probs, a, outcome, b)
    use_backend("compiled")
    py, c = results["python"], results["compiled"]
    assert np.allclose(py[0], c[0], atol=1e-12)
    assert np.allclose(py[1], c[1], atol=1e-12)
    assert py[2] == c[2]
    assert np.allclose(py[3], c[3], atol=1e-12)


@pytest.mark.skipif("compiled" not in available_backends(), reason="extension not built")
def test_end_to_end_identical_across_backends():
    outs = {}
    for name in ("python", "compiled"):
        use_backend(name)
        run = run_protocol("1001", "1011", ProtocolConfig(L=4, seed=5))
        est = detection_rate_mc(InterceptResend(2, Phase.S3), Phase.S3, 300, 8)
        outs[name] = (run.to_dict(include_transcript=True), est.detections, est.per_case)
    use_backend("compiled")
    assert outs["python"] == outs["compiled"]


def test_measure_rejects_degenerate_state(backend_name):
    base, off = gather_indices(1, 1, (0,))
    amps = np.zeros(2, dtype=complex)
    with pytest.raises(ArithmeticError):
        backend.kernels.measure(amps, base, off, np.eye(2, dtype=complex), 0.5, 1e-12)


def test_sampling_respects_uniform_draw(backend_name):
    base, off = gather_indices(1, 1, (0,))
    plus = np.array([0.6, 0.8], dtype=complex)
    basis = np.eye(2, dtype=complex)
    assert backend.kernels.measure(plus.copy(), base, off, basis, 0.35, 1e-12) == 0
    assert backend.kernels.measure(plus.copy(), base, off, basis, 0.37, 1e-12) == 1


def test_substreams_are_independent_and_reproducible():
    a = rngmod.substream(1, 0).random(4)
    assert np.array_equal(a, rngmod.substream(1, 0).random(4))
    assert not np.array_equal(a, rngmod.substream(1, 1).random(4))
    assert not np.array_equal(a, rngmod.substream(1, 0, rngmod.PARAMS).random(4))
    assert not np.array_equal(a, rngmod.substream(2, 0).random(4))
