# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled walk kernel.

Mirror of ``pywalk.run_walk``: identical draw order (numpy's ziggurat
standard-normal, consumed straight from the bit generator) and identical
floating-point expressions, so results are bit-identical to the fallback
for the same seed.  Any change here must be applied to pywalk.py too.

The whole loop runs with the GIL released; each walk owns its bit
generator, so ensembles parallelize across plain threads.
"""

from libc.math cimport sqrt

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport random_standard_normal

cnp.import_array()

cdef int _ABSORBED = 0
cdef int _STEP_CAP = 1
cdef int _BOUNCE_PATHOLOGY = 2

ABSORBED = _ABSORBED
STEP_CAP = _STEP_CAP
BOUNCE_PATHOLOGY = _BOUNCE_PATHOLOGY


def run_walk(
    start,
    centers,
    cos_radii,
    double sigma,
    layer_thr2,
    long long max_steps,
    int bounce_cap,
    bint aniso,
    double aniso_radius,
    double aniso_width,
    bint aniso_sqrt,
    bint langevin,
    double langevin_beta,
    bit_generator,
    long long capture_every=0,
    capture_buf=None,
    int wall_mode=0,
):
    """Same contract as ``pywalk.run_walk``."""
    cdef double[:, ::1] c_centers = np.ascontiguousarray(centers, dtype=np.float64)
    cdef double[::1] c_cosr = np.ascontiguousarray(cos_radii, dtype=np.float64)
    cdef double[::1] c_thr2 = np.ascontiguousarray(layer_thr2, dtype=np.float64)
    counts_arr = np.zeros(c_thr2.shape[0], dtype=np.int64)
    cdef long long[::1] counts = counts_arr

    cdef double[:, ::1] cap_view
    cdef long long cap_rows = 0
    if capture_buf is not None:
        cap_view = capture_buf
        cap_rows = cap_view.shape[0]
    else:
        cap_view = np.empty((1, 3), dtype=np.float64)

    cdef bitgen_t *rng = <bitgen_t *> PyCapsule_GetPointer(
        bit_generator.capsule, "BitGenerator"
    )

    cdef int n_traps = c_centers.shape[0]
    cdef int n_layers = c_thr2.shape[0]
    cdef double x, y, z, px, py, pz
    x = float(start[0]); y = float(start[1]); z = float(start[2])
    px = x; py = y; pz = z
    cdef double bufx = 0.0, bufy = 0.0, bufz = 0.0
    cdef double beta = langevin_beta
    cdef double gx, gy, gz, dx, dy, dz, lx, ly, lz
    cdef double rnorm, zdist, ratio, r3, f_par, f_perp, g_par, g_perp
    cdef double inv, ux, uy, uz, rad, rx, ry, rz
    cdef double nx, ny, nz, lam, kappa, disc, alpha, remaining, ddn
    cdef double rdx, rdy, rdz, r2, norm2
    cdef long long steps = 0, n_captured = 0
    cdef int trap_index = -1, status = _STEP_CAP
    cdef int bounces, j, m
    cdef bint absorbed, settled

    with nogil:
        if langevin:
            bufx = sigma * random_standard_normal(rng)
            bufy = sigma * random_standard_normal(rng)
            bufz = sigma * random_standard_normal(rng)

        while steps < max_steps:
            gx = random_standard_normal(rng)
            gy = random_standard_normal(rng)
            gz = random_standard_normal(rng)

            dx = sigma * gx
            dy = sigma * gy
            dz = sigma * gz
            if langevin:
                lx = (1.0 - beta) * (x - px) + beta * bufx
                ly = (1.0 - beta) * (y - py) + beta * bufy
                lz = (1.0 - beta) * (z - pz) + beta * bufz
                bufx = dx; bufy = dy; bufz = dz
                px = x; py = y; pz = z
                dx = lx; dy = ly; dz = lz

            if aniso:
                rnorm = sqrt(x * x + y * y + z * z)
                zdist = 1.0 - rnorm
                if zdist < aniso_width:
                    if zdist < aniso_radius:
                        zdist = aniso_radius
                    ratio = aniso_radius / zdist
                    r3 = ratio * ratio * ratio
                    f_par = (
                        1.0
                        - 0.5625 * ratio
                        + 0.125 * r3
                        - (45.0 / 256.0) * r3 * ratio
                        - 0.0625 * r3 * ratio * ratio
                    )
                    f_perp = 1.0 - 1.125 * ratio + 0.5 * r3
                    if aniso_sqrt:
                        g_par = sqrt(f_par)
                        g_perp = sqrt(f_perp)
                    else:
                        g_par = f_par
                        g_perp = f_perp
                    inv = 1.0 / rnorm
                    ux = x * inv
                    uy = y * inv
                    uz = z * inv
                    rad = dx * ux + dy * uy + dz * uz
                    rx = rad * ux
                    ry = rad * uy
                    rz = rad * uz
                    dx = g_perp * rx + g_par * (dx - rx)
                    dy = g_perp * ry + g_par * (dy - ry)
                    dz = g_perp * rz + g_par * (dz - rz)

            steps += 1
            bounces = 0
            absorbed = False
            settled = False
            while not settled:
                nx = x + dx
                ny = y + dy
                nz = z + dz
                norm2 = nx * nx + ny * ny + nz * nz
                if norm2 < 1.0:
                    x = nx; y = ny; z = nz
                    break
                if wall_mode == 1:
                    # wall entry point: first crossing of the segment
                    lam = sqrt(dx * dx + dy * dy + dz * dz)
                    if lam >= 1e-12:
                        kappa = (x * dx + y * dy + z * dz) / lam
                        disc = 1.0 + kappa * kappa - (x * x + y * y + z * z)
                        if disc < 0.0:
                            disc = 0.0
                        alpha = sqrt(disc) - kappa
                        inv = 1.0 / lam
                        ux = x + alpha * dx * inv
                        uy = y + alpha * dy * inv
                        uz = z + alpha * dz * inv
                        for j in range(n_traps):
                            if ux * c_centers[j, 0] + uy * c_centers[j, 1] + uz * c_centers[j, 2] > c_cosr[j]:
                                trap_index = j
                                absorbed = True
                                break
                        if absorbed:
                            x = ux; y = uy; z = uz
                            break
                    # settle on the wall at the normalized endpoint
                    inv = 1.0 / sqrt(norm2)
                    ux = nx * inv
                    uy = ny * inv
                    uz = nz * inv
                    for j in range(n_traps):
                        if ux * c_centers[j, 0] + uy * c_centers[j, 1] + uz * c_centers[j, 2] > c_cosr[j]:
                            trap_index = j
                            absorbed = True
                            break
                    x = ux; y = uy; z = uz
                    break
                lam = sqrt(dx * dx + dy * dy + dz * dz)
                if lam < 1e-12:
                    break
                kappa = (x * dx + y * dy + z * dz) / lam
                disc = 1.0 + kappa * kappa - (x * x + y * y + z * z)
                if disc < 0.0:
                    disc = 0.0
                alpha = sqrt(disc) - kappa
                inv = 1.0 / lam
                ux = x + alpha * dx * inv
                uy = y + alpha * dy * inv
                uz = z + alpha * dz * inv
                for j in range(n_traps):
                    if ux * c_centers[j, 0] + uy * c_centers[j, 1] + uz * c_centers[j, 2] > c_cosr[j]:
                        trap_index = j
                        absorbed = True
                        break
                if absorbed:
                    x = ux; y = uy; z = uz
                    break
                bounces += 1
                if bounces > bounce_cap:
                    status = _BOUNCE_PATHOLOGY
                    settled = True
                    break
                remaining = lam - alpha
                if remaining <= 1e-15:
                    x = ux; y = uy; z = uz
                    break
                ddn = (dx * ux + dy * uy + dz * uz) * inv
                rdx = dx * inv - 2.0 * ddn * ux
                rdy = dy * inv - 2.0 * ddn * uy
                rdz = dz * inv - 2.0 * ddn * uz
                dx = remaining * rdx
                dy = remaining * rdy
                dz = remaining * rdz
                x = ux; y = uy; z = uz

            if status == _BOUNCE_PATHOLOGY:
                break

            r2 = x * x + y * y + z * z
            for m in range(n_layers):
                if r2 >= c_thr2[m]:
                    counts[m] += 1
            if capture_every > 0 and steps % capture_every == 0 and n_captured < cap_rows:
                cap_view[n_captured, 0] = x
                cap_view[n_captured, 1] = y
                cap_view[n_captured, 2] = z
                n_captured += 1
            if absorbed:
                status = _ABSORBED
                break

    if status == BOUNCE_PATHOLOGY:
        return status, steps, -1, counts_arr, np.array([x, y, z]), n_captured
    return status, steps, trap_index, counts_arr, np.array([x, y, z]), n_captured
