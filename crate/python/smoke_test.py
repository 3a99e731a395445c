"""Smoke test for the bergman_py extension module.

Builds nothing itself: it locates the compiled cdylib under target/ (release
preferred), copies it next to this file as bergman_py.so, and exercises the
bindings end to end. Run from the repository root:

    cargo build -p bergman-py [--release]
    python3 python/smoke_test.py
"""

import math
import pathlib
import shutil
import sys

HERE = pathlib.Path(__file__).resolve().parent
ROOT = HERE.parent


def locate_extension():
    candidates = [
        ROOT / "target" / "release" / "libbergman_py.so",
        ROOT / "target" / "debug" / "libbergman_py.so",
    ]
    for src in candidates:
        if src.exists():
            dst = HERE / "bergman_py.so"
            if not dst.exists() or src.stat().st_mtime > dst.stat().st_mtime:
                shutil.copy2(src, dst)
            return dst
    sys.exit("build the extension first: cargo build -p bergman-py")


locate_extension()
sys.path.insert(0, str(HERE))

import bergman_py as bp  # noqa: E402


def check(label, ok):
    print(f"{'ok' if ok else 'FAIL'}  {label}")
    if not ok:
        sys.exit(1)


# model constructors and the curvature calibration
bf = bp.Model.bargmann_fock()
fs = bp.Model.fubini_study()
quartic = bp.Model.quartic("1/10")
check("bochner normalization", bf.bochner_ok() and fs.bochner_ok() and quartic.bochner_ok())

# coefficient tables: nullity, termination, golden values
bf_diag = bf.coefficients(3).diagonal()
check("bargmann_fock b_1..b_3 = 0", all(abs(c[0]) + abs(c[1]) < 1e-30 for c in bf_diag[1:]))

fs_diag = fs.coefficients(3).diagonal()
check(
    "fubini_study b_1 = 1, b_2 = b_3 = 0",
    abs(fs_diag[1][0] - 1.0) < 1e-30
    and all(abs(c[0]) + abs(c[1]) < 1e-30 for c in fs_diag[2:]),
)

qt = quartic.coefficients(2)
check(
    "quartic b_1 = -1/5, b_2 = 4/25",
    abs(qt.diagonal()[1][0] + 0.2) < 1e-14 and abs(qt.diagonal()[2][0] - 0.16) < 1e-14,
)

# oracle: Fubini-Study dimension identity K(0,0) = (k+1)/pi
re, im, weighted = fs.kernel(5, (0.0, 0.0), (0.0, 0.0))
check("fubini_study K(0,0) = 6/pi", abs(re - 6.0 / math.pi) < 1e-12 and abs(im) < 1e-12)

# expansion matches the oracle for the exactly solvable model
re_n, im_n, _ = fs.coefficients(1).eval_expansion(5, 1, (0.0, 0.0), (0.0, 0.0))
check("expansion terminates (FS, N = 1)", abs(re_n - re) < 1e-12)

# residual ladder: fitted exponent near N + 1 = 3
_, exponent = qt.residual_exponent([20, 40, 80], 2)
check("quartic residual exponent ~ 3", exponent is not None and abs(exponent - 3.0) < 0.5)

# log-kernel relation: k^2 * (1/k) log(1 + 1/k) -> 1
v = fs.log_kernel_residual(64, (0.0, 0.0), (0.0, 0.0))
check("log-kernel residual (FS, k = 64)", abs(v - 0.99227) < 1e-3)

# diastasis is positive off the diagonal, zero on it
check(
    "diastasis signs",
    quartic.diastasis((0.1, 0.0), (0.1, 0.0)) < 1e-30
    and quartic.diastasis((0.1, 0.0), (0.0, 0.1)) > 0,
)

# majorant recursion lower bound
rows, all_pass = bp.majorant_lower_bound("2", "1/2", 3, 2)
check("majorant lower bound (m <= 3, k <= 2)", all_pass and len(rows) == 9)

# growth fit recovers a planted model b_m = m!^2
sups = [math.factorial(m) ** 2 for m in range(7)]
log_c, sigma, r2 = bp.fit_growth(sups, 1, 6)
check("growth fit sigma = 2", abs(sigma - 2.0) < 1e-9 and r2 > 0.999999)

# truncation index
check("n0(1024, 1, 2, 1/2) = 4", bp.n0(1024.0, 1.0, 2.0, 0.5) == 4)

# Gevrey extension: restriction-like small-r behaviour and dbar smallness
f_abs, dbar_abs = bp.gevrey_extension("2", 0.125)
check("gevrey extension finite", 0 < f_abs < 1 and 0 < dbar_abs < 1e-3)

slope = bp.gevrey_vanishing_slope("2", [2.0**-p for p in range(3, 7)])
check("gevrey vanishing slope ~ 1", abs(slope - 1.0) < 0.25)

print("all smoke tests passed")
