# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping kernels. Mirror of _reservoir_py; keep in sync."""

from libc.math cimport ceil, pow

import numpy as np

cimport numpy as cnp

cnp.import_array()

DEF FIVE_THIRDS = 5.0 / 3.0


def step_subarea(intensity_mmps, fcap_mmps, double q_coef, double dstore_mm,
                 double dt_s, double max_step_mm, double d0_mm):
    """See lidscore._reservoir_py.step_subarea."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] intensity = \
        np.ascontiguousarray(intensity_mmps, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] fcap = \
        np.ascontiguousarray(fcap_mmps, dtype=np.float64)
    if intensity.shape[0] != fcap.shape[0]:
        raise ValueError("intensity and capacity series differ in length")
    cdef Py_ssize_t n = intensity.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] runoff = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] infil = np.zeros(n)
    cdef double d = d0_mm
    cdef double i, fc, excess, q0, rate, h, r_acc, f_acc, q, f
    cdef double avail_rate, demand, avail, scale
    cdef Py_ssize_t k, s, n_sub
    for k in range(n):
        i = intensity[k]
        fc = fcap[k]
        excess = d - dstore_mm
        q0 = q_coef * pow(excess, FIVE_THIRDS) if excess > 0.0 else 0.0
        rate = i + fc + q0
        n_sub = <Py_ssize_t>ceil(rate * dt_s / max_step_mm) if rate > 0.0 else 1
        if n_sub < 1:
            n_sub = 1
        elif n_sub > 3600:
            n_sub = 3600
        h = dt_s / n_sub
        r_acc = 0.0
        f_acc = 0.0
        for s in range(n_sub):
            f = fc
            avail_rate = i + d / h
            if f > avail_rate:
                f = avail_rate
            excess = d - dstore_mm
            q = q_coef * pow(excess, FIVE_THIRDS) if excess > 0.0 else 0.0
            avail = d + (i - f) * h
            take = q * h
            if take > avail:
                take = avail
            d = avail - take
            r_acc += take
            f_acc += f * h
        runoff[k] = r_acc
        infil[k] = f_acc
    return runoff, infil, d


def step_lid_unit(inflow_mm, double exfil_mmps, double drain_mmps,
                  double capacity_mm, double dt_s, double v0_mm):
    """See lidscore._reservoir_py.step_lid_unit."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] inflow = \
        np.ascontiguousarray(inflow_mm, dtype=np.float64)
    cdef Py_ssize_t n = inflow.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] overflow = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] drained = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] exfil = np.zeros(n)
    cdef double v = v0_mm
    cdef double out_rate = exfil_mmps + drain_mmps
    cdef double rin, t_rem, ov, dr, ex, take, net, t_event, step
    cdef Py_ssize_t k
    for k in range(n):
        rin = inflow[k] / dt_s
        t_rem = dt_s
        ov = 0.0
        dr = 0.0
        ex = 0.0
        while t_rem > 1e-12:
            if v <= 0.0 and rin <= out_rate:
                if out_rate > 0.0:
                    take = rin * t_rem
                    ex += take * exfil_mmps / out_rate
                    dr += take * drain_mmps / out_rate
                v = 0.0
                break
            if v >= capacity_mm and rin >= out_rate:
                ex += exfil_mmps * t_rem
                dr += drain_mmps * t_rem
                ov += (rin - out_rate) * t_rem
                break
            net = rin - out_rate
            if net > 0.0:
                t_event = (capacity_mm - v) / net
            elif net < 0.0:
                t_event = v / -net
            else:
                t_event = t_rem
            step = t_event if t_event < t_rem else t_rem
            ex += exfil_mmps * step
            dr += drain_mmps * step
            v += net * step
            if v < 0.0:
                v = 0.0
            elif v > capacity_mm:
                v = capacity_mm
            t_rem -= step
        overflow[k] = ov
        drained[k] = dr
        exfil[k] = ex
    return overflow, drained, exfil, v
