"""Reference values for test_specfun.cpp, computed with mpmath at 60 digits.

Wright function: direct power series in high precision.
Mittag-Leffler: direct power series, with the working precision raised to absorb the
cancellation of terms as large as exp(|x|^(1/alpha)).
"""
import mpmath as mp


def wright(alpha, theta):
    alpha = mp.mpf(alpha)
    theta = mp.mpf(theta)
    s = mp.mpf(0)
    k = 0
    while True:
        t = (-theta) ** k / (mp.factorial(k)) * mp.rgamma(1 - alpha - alpha * k)
        s += t
        if k > 20 and t != 0 and abs(t) < mp.mpf(10) ** (-mp.mp.dps + 5) * max(abs(s), mp.mpf(10) ** -300):
            break
        k += 1
    return s


def ml(alpha, beta, x):
    # the largest series term is about exp(|x|^(1/alpha)); carry enough digits to cancel it
    mp.mp.dps = int(60 + 1.2 * abs(x) ** (1 / alpha) / 2.3)
    alpha = mp.mpf(alpha)
    beta = mp.mpf(beta)
    x = mp.mpf(x)
    s = mp.mpf(0)
    k = 0
    while True:
        t = x**k * mp.rgamma(alpha * k + beta)
        s += t
        if k > 20 and abs(t) < mp.mpf(10) ** (-mp.mp.dps + 5) * max(abs(s), mp.mpf(10) ** -300):
            break
        k += 1
    return s


if __name__ == "__main__":
    mp.mp.dps = 200
    for a, th in [(0.3, 0.5), (0.3, 2.0), (0.3, 5.0), (0.3, 12.0), (0.7, 0.5), (0.7, 1.5), (0.7, 3.0), (0.7, 4.5),
                  (0.5, 7.0), (0.9, 2.0), (0.1, 3.0)]:
        print(f"    {{{a}, {th}, {mp.nstr(wright(a, th), 20)}}},")
    print()
    for a, b, x in [(0.3, 1.0, -0.5), (0.3, 1.0, -3.0), (0.3, 1.0, -6.0), (0.5, 1.0, -2.0), (0.7, 1.0, -1.0),
                    (0.7, 1.0, -8.0), (0.7, 1.0, -40.0), (0.7, 0.7, -0.5), (0.7, 0.7, -5.0), (0.7, 0.7, -30.0),
                    (0.7, 1.7, -3.0), (0.7, 1.7, -25.0), (0.9, 1.0, -10.0), (0.9, 0.9, -4.0), (0.5, 1.5, -6.0),
                    (0.3, 0.3, -2.0), (0.3, 1.3, -9.0)]:
        print(f"    {{{a}, {b}, {x}, {mp.nstr(ml(a, b, x), 20)}}},")
