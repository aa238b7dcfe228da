"""Smoke test for the ovmf_py extension module."""

import json

import ovmf_py


def main():
    assert ovmf_py.cm_qexpansion(-4, 5, 10) == [0, 1, -4, 0, 16, -14, 0, 0, -64, 81, 56]
    try:
        ovmf_py.cm_qexpansion(-4, 4)
    except ValueError:
        pass
    else:
        raise AssertionError("weight 4 should be rejected")

    r = ovmf_py.Residue(-14, 5, 6)
    assert int(r) == 5**6 - 14
    assert (r * r.inverse()).value == 1
    assert ovmf_py.Residue(50, 5, 6).valuation() == 2

    st = ovmf_py.stabilize(-4, 5, 5, 8)
    assert st["a_p"] == -14
    assert st["alpha"].valuation() == 4
    assert st["f"][5] == st["alpha"] * st["f"][1]

    form = ovmf_py.Eigenform(-4, 5, 5, 6, lmax=30)
    assert form.m_verified >= 6
    assert form.e_f == 2
    assert form.coefficient(1).value == 0
    assert form.coefficient(2).value == 1
    table = dict((l, int(v)) for l, v in form.table())
    assert table[3] == 43300771101273669 % 5**6

    report = json.loads(form.report_json(stability=False))
    assert set(report) == {"config", "m_verified", "e_f", "table", "checks"}
    failed = [c["name"] for c in report["checks"] if c["status"] == "fail"]
    assert not failed, failed
    print("ok:", len(table), "table entries, m_verified =", form.m_verified)


if __name__ == "__main__":
    main()
