#!/usr/bin/env python3
"""Independent numpy oracle for the simulator-pinned regression values.

Reproduces the waveform generator (MT19937 res53 uniforms + Box-Muller,
windowed-sinc low-pass), the preset PAs and a least-squares memory
polynomial postinverse, then prints the numbers frozen into the C++ tests.
"""
import numpy as np

FIR_HALF = 64


def uniforms(seed, count):
    rs = np.random.RandomState(seed)
    return rs.random_sample(count)


def gaussian_complex(seed, count):
    u = uniforms(seed, 2 * count).reshape(count, 2)
    r = np.sqrt(-2.0 * np.log(1.0 - u[:, 0]))
    th = 2.0 * np.pi * u[:, 1]
    return r * np.cos(th) + 1j * r * np.sin(th)


def lowpass(bw):
    fc = bw / 2.0
    n = np.arange(-FIR_HALF, FIR_HALF + 1)
    h = 2 * fc * np.sinc(2 * fc * n)
    w = 0.54 - 0.46 * np.cos(2 * np.pi * (n + FIR_HALF) / (2 * FIR_HALF))
    h = h * w
    return h / h.sum()


def waveform(seed, n, bw):
    w = gaussian_complex(seed, n + 2 * FIR_HALF)
    h = lowpass(bw)
    x = np.convolve(w, h[::-1], mode="valid")
    return x / np.sqrt(np.mean(np.abs(x) ** 2))


def preset(level):
    rho, sigma, lpa, kpa = 0.2, -0.12, 3, 4
    c = np.zeros((lpa + 1, kpa), complex)
    for l in range(lpa + 1):
        for k in range(kpa):
            c[l, k] = rho ** l * sigma ** k * np.exp(1j * 0.4 * (l + 2 * k))
    c[0, 0] = 1
    return dict(c=c, drive=-9.0 if level == "low" else -3.0, asat=1.0, snr=40.0)


def delayed(x, l):
    if l == 0:
        return x.copy()
    return np.concatenate([np.zeros(l, complex), x[:-l]])


def pa(cfg, phi, noise_seed=None):
    u = phi * 10 ** (cfg["drive"] / 20)
    if cfg["asat"] is not None:
        u = u / (1 + (np.abs(u) / cfg["asat"]) ** 6) ** (1 / 6)
    y = np.zeros_like(u)
    c = cfg["c"]
    for l in range(c.shape[0]):
        ul = delayed(u, l)
        for k in range(c.shape[1]):
            y += c[l, k] * ul * np.abs(ul) ** (2 * k)
    if noise_seed is not None and cfg["snr"] is not None:
        p = np.mean(np.abs(y) ** 2)
        g = gaussian_complex(noise_seed, len(y))
        y = y + g * np.sqrt(p * 10 ** (-cfg["snr"] / 10) / 2)
    return y


def nmse(est, ref):
    return 10 * np.log10(np.sum(np.abs(est - ref) ** 2) / np.sum(np.abs(ref) ** 2))


def ls_gain(ref, meas):
    return np.vdot(ref, meas) / np.vdot(ref, ref)


def basis(psi, taps, K):
    cols = []
    for l in range(taps):
        d = delayed(psi, l)
        for k in range(K):
            cols.append(d * np.abs(d) ** (2 * k))
    return np.stack(cols, axis=1)


def fit_eval(cfg, chi, chi_fresh, taps, K, noisy=True):
    psi = pa(cfg, chi, 1001 if noisy else None)
    C = ls_gain(chi, psi)
    psin = psi / C
    n = len(chi)
    split = int(n * 0.8)
    B = basis(psin, taps, K)
    lam, *_ = np.linalg.lstsq(B[taps - 1:split], chi[taps - 1:split], rcond=None)
    post = nmse(B[split:] @ lam, chi[split:])
    phi = basis(chi_fresh, taps, K) @ lam
    y = pa(cfg, phi)
    C2 = ls_gain(chi_fresh, y)
    lin = nmse(y, C2 * chi_fresh)
    y0 = pa(cfg, chi_fresh)
    nod = nmse(y0, ls_gain(chi_fresh, y0) * chi_fresh)
    res = np.sum(np.abs(B[taps - 1:split] @ lam - chi[taps - 1:split]) ** 2)
    return post, lin, nod, res


if __name__ == "__main__":
    x = waveform(7, 65536, 0.25)
    p = np.abs(x) ** 2
    print("waveform(7,65536,0.25) PAPR dB = %.6f" % (10 * np.log10(p.max() / p.mean())))
    print("first samples seed 7 n 4096:", waveform(7, 4096, 0.25)[:3])
    chi = waveform(11, 65536, 0.25)
    fresh = waveform(12, 65536, 0.25)
    for lvl in ("low", "high"):
        cfg = preset(lvl)
        y = pa(cfg, chi)
        print(lvl, "no-DPD nmse(psi/C, chi) = %.6f" % nmse(y / ls_gain(chi, y), chi))
        for taps, K in ((1, 4), (4, 4), (7, 3)):
            for noisy in (True, False):
                post, lin, nod, res = fit_eval(cfg, chi, fresh, taps, K, noisy)
                print("  %s T=%d K=%d noisy=%d post=%.4f lin=%.4f nodpd=%.4f res=%.6e"
                      % (lvl, taps, K, noisy, post, lin, nod, res))
    np.set_printoptions(precision=17)
    x = waveform(7, 4096, 0.25)
    for lvl in ("low", "high"):
        print(lvl, "pa(waveform(7,4096)) samples 0,1,100:", pa(preset(lvl), x)[[0, 1, 100]])
        print(lvl, "noisy (seed 5) sample 100:", pa(preset(lvl), x, 5)[100])
