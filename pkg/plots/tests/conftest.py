import pytest


@pytest.fixture
def effective_csv(tmp_path):
    # alternating timing with theta1 = 0.5: hat1 = hat2 = lambda/2 up to bar0
    lines = ["# bar0=1,bar1=0.5,bar2=0.5", "lambda,hat1,hat2"]
    n = 21
    for i in range(n):
        lam = 2.0 * i / (n - 1)
        h1 = max(0.5 * min(lam, 1.0), min(lam, 1.0) - 0.5)
        lines.append(f"{lam},{h1},{min(lam, 1.0) - h1}")
    p = tmp_path / "effective_germ.csv"
    p.write_text("\n".join(lines) + "\n")
    return p


@pytest.fixture
def run_dir(tmp_path):
    d = tmp_path / "run"
    d.mkdir()
    for t, bump in (("0.5", 0.2), ("1", 0.4)):
        rows = ["x,branch,rho"]
        for j in range(3):
            for i in range(10):
                x = (-1 + i * 0.1) if j == 0 else (i * 0.1 + 0.05)
                rows.append(f"{x},{j},{bump * (j + 1) / 3}")
        (d / f"snapshot_{t}.csv").write_text("\n".join(rows) + "\n")
    return d


@pytest.fixture
def convergence_csv(tmp_path):
    p = tmp_path / "convergence.csv"
    p.write_text("eps,l1_error\n0.25,0.4\n0.125,0.21\n0.0625,0.1\n")
    return p


@pytest.fixture
def corrector_csv(tmp_path):
    rows = ["t,x,branch,u"]
    for t in (0.0, 0.5):
        for j in (0, 1, 2):
            for i in range(1, 9):
                x = -i * 0.5 if j == 0 else i * 0.5
                u = 0.3 + 0.5 / (i + t + 1)
                rows.append(f"{t},{x},{j},{u}")
    p = tmp_path / "corrector.csv"
    p.write_text("\n".join(rows) + "\n")
    return p
