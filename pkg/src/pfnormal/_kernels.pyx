# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels; see _kernels_py for the reference versions."""

from libc.math cimport copysign, fabs, hypot, pow, sqrt

from ._kernels_py import KernelError, DOMAIN, EPS4, NO_CONVERGENCE


cdef inline double complex _csqrt(double complex z) nogil:
    # principal square root with cmath's signed-zero convention
    cdef double re = z.real
    cdef double im = z.imag
    cdef double r, s, w
    if re == 0.0 and im == 0.0:
        return 0.0 + 1j * im
    r = hypot(re, im)
    if re >= 0.0:
        s = sqrt(0.5 * (r + re))
        return s + 1j * (im / (2.0 * s))
    w = sqrt(0.5 * (r - re))
    return fabs(im) / (2.0 * w) + 1j * copysign(w, im)


cdef inline double _cabs(double complex z) nogil:
    return hypot(z.real, z.imag)


def carlson_rf(x, y, z, double rtol, int max_iter):
    cdef double complex cx = complex(x), cy = complex(y), cz = complex(z)
    cdef int zeros = 0
    for v in (cx, cy, cz):
        if v.imag == 0.0 and v.real < 0.0:
            raise KernelError(DOMAIN, f"argument {v} on the negative real axis")
        if v == 0:
            zeros += 1
    if zeros > 1:
        raise KernelError(DOMAIN, "more than one argument is zero")
    cdef double complex a0 = (cx + cy + cz) / 3.0
    cdef double q = pow(3.0 * rtol, -1.0 / 6.0) * max(_cabs(a0 - cx), _cabs(a0 - cy), _cabs(a0 - cz))
    cdef double complex a = a0, x0 = cx, y0 = cy
    cdef double complex sx, sy, sz, lam, dx, dy, dz, e2, e3, poly
    cdef double fourn = 1.0
    cdef int i
    cdef bint done = False
    for i in range(max_iter):
        if q < _cabs(a) * fourn:
            done = True
            break
        sx = _csqrt(cx)
        sy = _csqrt(cy)
        sz = _csqrt(cz)
        lam = sx * sy + sx * sz + sy * sz
        cx = (cx + lam) * 0.25
        cy = (cy + lam) * 0.25
        cz = (cz + lam) * 0.25
        a = (a + lam) * 0.25
        fourn *= 4.0
    if not done:
        raise KernelError(NO_CONVERGENCE, f"RF did not converge in {max_iter} iterations")
    dx = (a0 - x0) / (fourn * a)
    dy = (a0 - y0) / (fourn * a)
    dz = -(dx + dy)
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    poly = 1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0
    return complex(poly / _csqrt(a))


def agm(double a, double b, double rtol, int max_iter):
    cdef double an
    cdef int i
    if a <= 0.0 or b <= 0.0:
        raise KernelError(DOMAIN, "agm needs positive arguments")
    rtol = max(rtol, EPS4)
    for i in range(max_iter):
        if fabs(a - b) <= rtol * a:
            return 0.5 * (a + b)
        an = 0.5 * (a + b)
        b = sqrt(a * b)
        a = an
    raise KernelError(NO_CONVERGENCE, f"agm did not converge in {max_iter} iterations")


def hyp2f1_halves(t, double tol, int max_terms):
    cdef double complex ct = complex(t)
    cdef double complex term = 1.0
    cdef double complex total = 1.0
    cdef double r
    cdef int n
    for n in range(max_terms):
        r = (n + 0.5) / (n + 1.0)
        term = term * (r * r) * ct
        total = total + term
        if _cabs(term) < tol:
            return complex(total)
    raise KernelError(NO_CONVERGENCE, f"series did not reach tol in {max_terms} terms")


def pvi_rhs(X, V, t, double alpha, double beta, double gamma, double delta):
    cdef double complex cX = complex(X), cV = complex(V), ct = complex(t)
    cdef double complex xm1 = cX - 1.0
    cdef double complex xmt = cX - ct
    cdef double complex tm1 = ct - 1.0
    cdef double complex bracket
    if cX == 0:
        raise KernelError(DOMAIN, "X = 0")
    if xm1 == 0:
        raise KernelError(DOMAIN, "X = 1")
    if xmt == 0:
        raise KernelError(DOMAIN, "X = t")
    if ct == 0 or tm1 == 0:
        raise KernelError(DOMAIN, "t in {0, 1}")
    bracket = alpha + beta * ct / (cX * cX) + gamma * tm1 / (xm1 * xm1) + delta * ct * tm1 / (xmt * xmt)
    return complex(0.5 * (1.0 / cX + 1.0 / xm1 + 1.0 / xmt) * cV * cV
                   - (1.0 / ct + 1.0 / tm1 + 1.0 / xmt) * cV
                   + cX * xm1 * xmt / (ct * ct * tm1 * tm1) * bracket)
