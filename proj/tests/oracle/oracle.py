"""Independent high-precision reference values for the unit tests.

Run from the repository root:
    python3 tests/oracle/oracle.py > tests/unit/oracle_values.hpp
"""
import mpmath as mp

mp.mp.dps = 40
pi = mp.pi


def lam(c, j):
    return c * mp.sqrt(j * j + c * c)


def nu(h, j):
    return j * j / (1 + mp.sqrt(1 + h * j * j))


def w(c, j):
    return mp.sqrt(1 + mp.mpf(j) ** 2 / c**2)


def N(i, j):
    return 3 / (8 * pi) * (2 - (1 if i == j else 0))


def A_matrix(c, J):
    return mp.matrix([[N(i, j) / (w(c, i) * w(c, j)) for j in J] for i in J])


def wilson(hits, n, z=mp.mpf("1.959963984540054")):
    p = mp.mpf(hits) / n
    den = 1 + z * z / n
    mid = (p + z * z / (2 * n)) / den
    half = z * mp.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return mid - half, mid + half


def schedule(eps0, r0=mp.mpf("1e-3"), varsigma=mp.mpf(1) / 36, tau=1, Nt=3, sigma0=mp.mpf("0.05"), C1=1, nu_max=12):
    mu = 2 * tau + Nt + 3
    a0 = mp.mpf(5) / 3 + 3 * varsigma
    a1 = 2 + varsigma
    alpha0 = r0**a0
    alpha1 = r0**a1
    eps = [eps0, (eps0 / alpha0) ** (mp.mpf(1) / 3) * eps0]
    alpha = [alpha0] + [alpha1 / 2 * (1 + mp.mpf(2) ** (1 - k)) for k in range(1, nu_max + 1)]
    sigma = [sigma0 / mp.mpf(2) ** k for k in range(nu_max + 1)]
    for k in range(1, nu_max):
        eps.append(C1 * eps[k] ** (mp.mpf(4) / 3) / (alpha[k] * sigma[k] ** mu) ** (mp.mpf(1) / 3))
    eta = [(eps[k] / (alpha[k] * sigma[k] ** mu)) ** (mp.mpf(1) / 3) for k in range(nu_max + 1)]
    return eps, eta


def emit(name, value):
    print(f"inline constexpr double {name} = {mp.nstr(value, 20, min_fixed=-4, max_fixed=4)};")


print("#pragma once")
print("// Generated by tests/oracle/oracle.py (mpmath, 40 digits). Do not edit.")
print()
print("namespace oracle {")
print()
emit("lambda_1_1", lam(1, 1))
emit("lambda_10_3", lam(10, 3))
emit("nu_1_1", nu(1, 1))
emit("nu_h001_5", nu(mp.mpf("0.01"), 5))
emit("norm_delta2", mp.sqrt(1 + 4) * w(2, 2))

c = mp.mpf(10)
# merged quartic coefficients at c = 10
emit("P_0000", 6 / (32 * pi))
emit("P_pppp_12m30_c10", 24 / (32 * pi * mp.sqrt(w(c, 1) * w(c, 2) * w(c, 3) * w(c, 0))))
emit("P_pmpm_1122_c10", 4 * 6 / (32 * pi * w(c, 1) * w(c, 2)))
emit("P_r_5_c10", 4 * 6 / (32 * pi) * (1 / w(c, 5) ** 2 - 1))
emit("Lplus_12_c10", N(1, 2) / (w(c, 1) * w(c, 2)))
emit("Lplus_11_c10", N(1, 1) / 2 / w(c, 1) ** 2)
emit("A_12_c10", N(1, 2) / ((1 + nu(1 / c**2, 1) / 100) * (1 + nu(1 / c**2, 2) / 100)))

J = [1, 2, 3]
Ainv = A_matrix(c, J) ** -1
for a in range(3):
    for b in range(3):
        emit(f"Ainv_{a}{b}_c10", Ainv[a, b])
rhs = mp.matrix([-(3 / (4 * pi)) / (w(c, 5) * w(c, j)) for j in J])
x = mp.lu_solve(A_matrix(c, J), rhs)
for a in range(3):
    emit(f"melnikov_delta5_x{a}_c10", x[a])

emit("psi_cos_c1", mp.mpf(2) ** (mp.mpf(1) / 4) / (2 * mp.sqrt(2)))
emit("xL_2", mp.sqrt(3))
emit("xL_4", mp.sqrt(8))
lo, hi = wilson(5, 100)
emit("wilson_5_100_lo", lo)
emit("wilson_5_100_hi", hi)
lo, hi = wilson(0, 1000)
emit("wilson_0_1000_hi", hi)

emit("c_admissible_R1em2", mp.mpf(10) ** (mp.mpf(146) / 72))
R = mp.mpf("1e-2")
emit("distance_R1em2_c200_s1", R ** (mp.mpf(1) / 36 - mp.mpf(215) / 72) / 200**2)
emit("measure_R1em2", R ** (mp.mpf(1) / 36))

eps, eta = schedule(mp.mpf("1e-25"))
emit("log_eps1_1em25", mp.log(eps[1]))
emit("log_eps12_1em25", mp.log(eps[12]))
emit("eta1_1em25", eta[1])
emit("eta5_1em25", eta[5])
print()
print("}  // namespace oracle")
