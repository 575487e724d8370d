"""Smoke test for the Python extension. Run after `maturin develop` or
installing the built wheel: `python python/smoke_test.py`."""

import json

import blaschke_lab as bl


def main() -> None:
    z7 = bl.BlaschkeProduct([(0j, 7)], -1)
    assert z7.order == 7
    assert abs(z7(0.5) - (0.5**7)) < 1e-14
    assert z7.equivalent_to_power()

    report = bl.classify(z7)
    assert report["schema"] == bl.SCHEMA
    assert report["dirichlet_dim"] == 7
    assert report["theorem_case"] == "power"
    assert report["cross_check"]["status"] == "pass"

    z4_phi = bl.BlaschkeProduct([(0j, 4), (0.5 + 0j, 1)])
    assert bl.monodromy_partition(z4_phi).blocks == [[0], [1, 2, 3, 4]]
    assert len(z4_phi.critical_points()) == 4

    assert len(bl.enumerate_admissible(5)) == 3
    assert len(bl.enumerate_admissible(6, filter=True)) == 6
    p = bl.Partition(5, [[0], [1, 4], [2, 3]])
    assert p.q == 3 and p.dual().q == 3 and all(p.conditions().values())

    dims = [bl.dirichlet_dim(b) for _, b, _ in bl.order6_case_suite()]
    assert dims == [6, 3, 2, 2, 3, 2, 2, 1], dims

    text = bl.classify_json(z4_phi)
    assert json.loads(text)["partition"] == [[0], [1, 2, 3, 4]]

    try:
        bl.BlaschkeProduct([(1.5 + 0j, 1)])
    except ValueError:
        pass
    else:
        raise AssertionError("zero outside the disk accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
