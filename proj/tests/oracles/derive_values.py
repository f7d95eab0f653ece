"""Independent high-precision derivations of the values frozen into the C++ tests.

Run: python3 tests/oracles/derive_values.py
Every printed number is computed here from first principles with mpmath, without using the
C++ library, and copied into the corresponding test as a constant.
"""
import mpmath as mp

mp.mp.dps = 40
pi = mp.pi
sqpi = mp.sqrt(pi)


def db_to_d2(db):
    return mp.power(10, -mp.mpf(db) / 10)


def show(name, v):
    print(f"{name} = {mp.nstr(v, 17)}")


# Two-mode readout: u* maximizes h(u) = 1/u - (1-e^{-u/2})(3-e^{-u/2})/u^2.
def h(u):
    y = mp.e ** (-u / 2)
    return 1 / u - (1 - y) * (3 - y) / u**2


u_star = mp.findroot(lambda u: mp.diff(h, u), 3.8)
show("u_star", u_star)


def eta_eff(gt, eta, squeezed):
    # g = 1, t = gt, kappa = u*/t
    t = gt
    k = u_star / t
    y = mp.e ** (-k * t / 2)
    tau = t - (1 - y) * (3 - y) / k
    if not squeezed:
        return 4 * tau * eta / (4 * tau * eta + k)
    c = (k * tau - eta * (1 - y) ** 4) / (4 * tau**2 * eta)
    return 1 / (c + 1)


for target in ("0.85", "0.92"):
    for sq in (False, True):
        gt = mp.findroot(lambda x: eta_eff(x, mp.mpf("0.75"), sq) - mp.mpf(target), 5)
        show(f"g_t(eta=0.75, target={target}, squeezed={sq})", gt)
for eta in ("0.5", "1"):
    gt = mp.findroot(lambda x: eta_eff(x, mp.mpf(eta), False) - mp.mpf("0.92"), 5)
    show(f"g_t(eta={eta}, target=0.92)", gt)


# Binned readout, cross terms dropped: peak mixture of Gaussians blurred by the POVM.
def binned_series(alpha1, d2, eta):
    th, sech = mp.tanh(d2), 1 / mp.cosh(d2)
    sig = mp.sqrt((th + (1 - eta) / eta) / 2)
    b = mp.cosh(d2) * alpha1

    def ncdf(x):
        return mp.ncdf(x)

    out = []
    for parity in (0, 1):
        wsum = psum = 0
        for s in range(-30, 31):
            k = 2 * s + parity
            w = mp.e ** (-((k * alpha1) ** 2) * th)
            mu = k * alpha1 * sech
            shift = mp.mpf(0.5) if parity == 0 else mp.mpf(-0.5)
            p = 0
            tc = int(mp.floor(mu / (2 * b)))
            for t in range(tc - 40, tc + 41):
                lo, hi = (2 * t + shift) * b, (2 * t + shift + 1) * b
                p += ncdf((hi - mu) / sig) - ncdf((lo - mu) / sig)
            wsum += w
            psum += w * p
        out.append(psum / wsum)
    return out


d12 = db_to_d2(12)
for eta in ("1", "0.92", "0.85"):
    p10, p01 = binned_series(sqpi, d12, mp.mpf(eta))
    show(f"M_series(square, 12 dB, eta={eta})", (p10 + p01) / 2)
p10, p01 = binned_series(sqpi, mp.mpf("1e-6"), mp.mpf("0.7"))
show("M_series(square, Delta^2=1e-6, eta=0.7)", (p10 + p01) / 2)
show("erfc(sqrt(pi)/(2 Delta)) at 12 dB", mp.erfc(sqpi / (2 * mp.sqrt(d12))))

# Isotropic Gaussian mass outside the square Voronoi cell [-sqrt(pi)/2, sqrt(pi)/2]^2.
for s in ("0.3", "0.2"):
    s = mp.mpf(s)
    show(f"square tail sigma={s}", 1 - mp.erf(sqpi / (2 * mp.sqrt(2) * s)) ** 2)

# Hexagonal Voronoi cell: regular hexagon with inradius d/2, d = sqrt(2 pi / sqrt 3).
d_hex = mp.sqrt(2 * pi / mp.sqrt(3))
s = mp.mpf("0.3")


def hex_tail(s):
    # Polar integral over one 60-degree wedge: facet at distance d/2, angle in [-30, 30] degrees.
    f = lambda th: mp.e ** (-((d_hex / 2) / mp.cos(th)) ** 2 / (2 * s**2))
    return 6 * mp.quad(f, [-pi / 6, pi / 6]) / (2 * pi)


show("hex tail sigma=0.3", hex_tail(s))

# Twirled variances.
def twirl_exact(d2, tau, nu, phi):
    return (tau * mp.tanh(d2 / 2) + nu + (1 - tau) ** 2 / (2 * mp.tanh(d2))
            + 2 * tau * mp.sin(phi / 2) ** 2 / mp.sinh(d2))


g = mp.mpf("0.01")
tau, nu = mp.sqrt(1 - g), g / 2
show("loss sigma2 (10 dB, 1%)", twirl_exact(db_to_d2(10), tau, nu, 0))
show("Delta2_opt(1%)", -mp.log(mp.sqrt(1 - g)))

# Critical dephasing with the small-parameter sigma_g^2 on the square code (d = sqrt(pi)).
for db in (10, 12):
    d2 = db_to_d2(db)
    sg2 = d2 / 2 + nu + (1 - tau) ** 2 / (2 * d2)
    sc = 2 * mp.sqrt(2) * mp.sqrt(d2) * sg2 / sqpi
    show(f"sigma_d*^2 ({db} dB, 1%)", sc**2)

# Numeric dephasing integral: square code, 10 dB, 1% loss, sigma_d^2 = 0.6%.
d2 = db_to_d2(10)
sd = mp.sqrt(mp.mpf("0.006"))
f = lambda p: mp.e ** (-p**2 / (2 * sd**2)) * mp.erfc(sqpi / (2 * mp.sqrt(2 * twirl_exact(d2, tau, nu, p))))
fe = 2 * mp.quad(f, [-pi, 0, pi]) / mp.sqrt(2 * pi * sd**2)
show("dephasing F_e (10 dB, 1%, 0.6%)", fe)
show("dephasing avg infidelity", fe * 2 / 3)


# Pauli-operator series coefficients by direct 2-D integration over the Voronoi cell.
def coeff(poly, v, ell):
    def w(k1, k2):
        return mp.cos(k1 * v[1] - k2 * v[0])

    total = 0
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        e = (b[0] - a[0], b[1] - a[1])
        jac = abs(a[0] * e[1] - a[1] * e[0])
        total += jac * mp.quad(lambda t: mp.quad(lambda u: u * w(u * (a[0] + t * e[0]), u * (a[1] + t * e[1])), [0, 1]), [0, 1])
    om = ell[0] * (v[1] - ell[1]) - ell[1] * (v[0] - ell[0])
    sign = (-1) ** int(mp.nint(om / (2 * pi)))
    return sign * total / pi


h = sqpi / 2
sq_poly = [(h, -h), (h, h), (-h, h), (-h, -h)]
alpha, beta = (sqpi, mp.mpf(0)), (mp.mpf(0), sqpi)
for (i, j, ell) in [(1, 0, alpha), (3, 0, alpha), (1, 1, (alpha[0], beta[1])), (0, -3, beta)]:
    v = (i * alpha[0] + j * beta[0], i * alpha[1] + j * beta[1])
    show(f"square coeff ({i},{j})", coeff(sq_poly, v, ell))
