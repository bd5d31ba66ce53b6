"""Smoke test for the Python bindings: `python python/smoke_test.py`."""

import json
from fractions import Fraction

import latkit


def main():
    z2 = latkit.Lattice.named("Z2")
    ps = latkit.pair_sum(z2, json.dumps({"kind": "signed", "images": [2, -1]}))
    k = ps.k
    assert k.rank == 4 and k.det() == 4 and k.is_even()
    assert ps.index_in_ambient == 2
    assert latkit.isometric(latkit.Lattice.named("D4"), k) is not None

    a2 = latkit.Lattice.named("A2")
    rot = latkit.pair_sum(a2, json.dumps({"kind": "perm", "cycles": [[1, 2, 3]]}))
    assert rot.k.det() == 81
    assert rot.k.smith() == [1, 3, 3, 9]

    d4 = latkit.Lattice.named("D4")
    assert d4.identify()["verdict"] == {"named": "D4"}
    assert d4.dual().det() == Fraction(1, 4)
    assert d4.minimal_norm() == 2 and len(d4.minimal_vectors()) == 24

    try:
        latkit.Lattice.named("Q7")
    except latkit.LatticeError:
        pass
    else:
        raise AssertionError("unknown name accepted")

    report = latkit.reproduce("z2")
    statuses = {c["id"]: c["status"] for c in report["cases"]}
    assert statuses["Z2.rot90"] == "pass", statuses
    print(f"ok: {len(statuses)} Z2 cases, K(Z2, rot90) = {k!r}")


if __name__ == "__main__":
    main()
