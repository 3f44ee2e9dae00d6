import numpy as np
import pytest

import lhzqec


def test_toy_energies():
    toy = lhzqec.toy_instance()
    assert lhzqec.logical_energy([-1, -1, -1], toy) == -5
    assert lhzqec.logical_energy([1, 1, -1], toy) == 7


def test_instance_round_trip():
    inst = lhzqec.generate_instance(6, 3)
    assert inst.size == 6
    c = inst.couplings
    assert c.shape == (6, 6)
    assert np.allclose(c, c.T)
    assert lhzqec.Instance.from_dict(inst.to_dict()) == inst


def test_encode_and_decode_single_error():
    inst = lhzqec.generate_instance(7, 5)
    z = [1, -1, 1, 1, -1, -1, 1]
    code = lhzqec.encode_pe(z)
    assert code.dtype == np.int8
    assert lhzqec.is_code_state(code)
    r = code.copy()
    r[2, 5] = r[5, 2] = -r[2, 5]
    assert lhzqec.penalty_energy(r) > 0
    assert np.array_equal(lhzqec.pe_mvd_weight2(r), code)
    d = lhzqec.decode_pe(r, inst)
    assert d["Z_star"] == lhzqec.canonical_logical(z)
    assert d["converged"]


def test_majority_helpers():
    assert lhzqec.repetition_mvd([1, -1, -1]) == -1
    assert lhzqec.repetition_mvd([1, -1]) == 0
    state, ties = lhzqec.qac_mvd(np.array([[1, 1, -1], [-1, -1, 1]]))
    assert state == [1, -1] and ties == 0


def test_sample_shapes_and_energy():
    inst = lhzqec.generate_instance(5, 1)
    out = lhzqec.sample(inst, beta=2.0, gamma=0.5, steps=100, seed=3)
    assert out["states"].shape == (100, 5, 5)
    assert (out["multiplicity"] >= 1).all()
    e = lhzqec.physical_energy(out["states"][-1], inst, 2.0, 0.5)
    assert e == pytest.approx(out["energy"][-1], abs=1e-9)


def test_toy_validate_short():
    report = lhzqec.toy_validate(seed=2, steps=100000)
    assert report["passed"]


def test_sweep_and_spectra():
    cfg = {
        "instance": {"generate": {"K": 5, "seed": 4}},
        "grid": [[1.0, 0.1], [4.0, 1.0]],
        "repetitions": 3,
        "steps": 100,
        "seed": 6,
    }
    summary = lhzqec.run_sweep(cfg)
    assert len(summary["cells"]) == 2
    spec = lhzqec.run_spectra({"instance": cfg["instance"], "beta": 2.0, "gamma": 0.2, "steps": 500})
    rows = lhzqec.decode_series(spec["series_csv"])
    assert len(rows) == 500
    assert {row["class"] for row in rows} <= {"red", "gray", "green", "other"}


def test_errors_map_to_value_error():
    with pytest.raises(ValueError):
        lhzqec.generate_instance(1, 0)
    with pytest.raises(lhzqec.CorruptInput):
        lhzqec.decode_series("not a series\n")
