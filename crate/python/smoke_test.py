"""Smoke test for the pycqrrpt extension: factor, validate, sketch round trip."""

import pycqrrpt


def matmul(a, b):
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]


def main():
    m = pycqrrpt.generate("exact-rank", 300, 40, seed=1, rank=12)
    f = pycqrrpt.cqrrpt(m, gamma=1.25, family="saso", nnz=4, seed=2)
    assert f.k == 12, f
    loss, err, ok = pycqrrpt.validate(f, m, 1e-12)
    assert ok, (loss, err)

    permuted = [[row[j] for j in f.pivots] for row in m]
    qr = matmul(f.q, f.r)
    diff = max(abs(a - b) for ra, rb in zip(permuted, qr) for a, b in zip(ra, rb))
    assert diff < 1e-10, diff

    s = pycqrrpt.SketchOperator("srft", 50, 300, seed=3)
    again = pycqrrpt.SketchOperator.from_bytes(s.to_bytes())
    assert again.to_dense() == s.to_dense()
    g = pycqrrpt.cqrrpt_with_sketch(m, s)
    assert g.k == 12

    trailing, ref_diag, test_diag = pycqrrpt.pivot_quality(f, m)
    assert len(trailing) == 40 and len(ref_diag) == len(test_diag) == 40

    assert abs(sum(pycqrrpt.leverage_scores(pycqrrpt.generate("gaussian", 100, 5))) - 5) < 1e-10
    assert pycqrrpt.flop_model(1000, 100, 100, 125) > 3.2e7
    print("pycqrrpt smoke test passed:", f, dict(f.record())["cond_pre"])


if __name__ == "__main__":
    main()
