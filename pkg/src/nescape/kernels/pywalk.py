"""Pure-Python walk kernel (fallback).

Runs one walk to absorption: Gaussian steps, optional velocity-relaxation
assembly, optional near-wall anisotropic rescaling, specular wall
reflections with escape checks at every contact, and per-shell occupancy
counters.

This is the reference for the compiled kernel in ``_cywalk.pyx``: the two
consume the identical normal-draw sequence (numpy's ziggurat sampler) and
evaluate the identical floating-point expressions, so for a given bit
generator state they produce bit-identical results.  Keep the arithmetic
here and in the .pyx file textually in sync.
"""

from __future__ import annotations

import math

import numpy as np

# Walk termination status codes (shared with the compiled kernel).
ABSORBED = 0
STEP_CAP = 1
BOUNCE_PATHOLOGY = 2

# Normal draws are taken in blocks of this many steps; unused draws at the
# end of a finished walk are simply discarded with the stream.
_CHUNK = 4096


def run_walk(
    start,
    centers,
    cos_radii,
    sigma,
    layer_thr2,
    max_steps,
    bounce_cap,
    aniso,
    aniso_radius,
    aniso_width,
    aniso_sqrt,
    langevin,
    langevin_beta,
    bit_generator,
    capture_every=0,
    capture_buf=None,
    wall_mode=0,
):
    """Run a single walk; see ``nescape.engine.run_walk`` for the wrapper.

    ``wall_mode`` selects the boundary treatment for a step whose endpoint
    leaves the ball: 0 folds the remainder back inside (specular
    reflection, length-preserving) with an escape check at every contact
    point; 1 ends the step on the wall, checking escape at the segment's
    first sphere crossing and at the normalized endpoint where the
    particle settles (it then hugs the wall until a step pulls it back
    inside).

    Returns ``(status, steps, trap_index, boundary_counts, final, n_captured)``
    where ``boundary_counts[m]`` is the number of end-of-step positions
    (absorption contact included) with squared norm >= ``layer_thr2[m]``.
    """
    gen = np.random.Generator(bit_generator)
    centers = np.ascontiguousarray(centers, dtype=np.float64)
    cos_radii = np.ascontiguousarray(cos_radii, dtype=np.float64)
    layer_thr2 = np.ascontiguousarray(layer_thr2, dtype=np.float64)
    n_traps = centers.shape[0]
    n_layers = layer_thr2.shape[0]
    counts = np.zeros(n_layers, dtype=np.int64)
    cap_rows = 0 if capture_buf is None else capture_buf.shape[0]

    x, y, z = (float(v) for v in start)
    px, py, pz = x, y, z          # previous position (velocity-relaxation)
    bufx = bufy = bufz = 0.0      # previous Gaussian draw
    sigma = float(sigma)
    beta = float(langevin_beta)
    sqrt = math.sqrt

    draws = gen.standard_normal((_CHUNK, 3))
    row = 0
    if langevin:
        bufx = sigma * draws[0, 0]
        bufy = sigma * draws[0, 1]
        bufz = sigma * draws[0, 2]
        row = 1

    steps = 0
    n_captured = 0
    trap_index = -1
    status = STEP_CAP

    while steps < max_steps:
        if row == _CHUNK:
            draws = gen.standard_normal((_CHUNK, 3))
            row = 0
        gx = draws[row, 0]
        gy = draws[row, 1]
        gz = draws[row, 2]
        row += 1

        dx = sigma * gx
        dy = sigma * gy
        dz = sigma * gz
        if langevin:
            lx = (1.0 - beta) * (x - px) + beta * bufx
            ly = (1.0 - beta) * (y - py) + beta * bufy
            lz = (1.0 - beta) * (z - pz) + beta * bufz
            bufx, bufy, bufz = dx, dy, dz
            px, py, pz = x, y, z
            dx, dy, dz = lx, ly, lz

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
        while True:
            nx = x + dx
            ny = y + dy
            nz = z + dz
            norm2 = nx * nx + ny * ny + nz * nz
            if norm2 < 1.0:
                x, y, z = nx, ny, nz
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
                        if ux * centers[j, 0] + uy * centers[j, 1] + uz * centers[j, 2] > cos_radii[j]:
                            trap_index = j
                            absorbed = True
                            break
                    if absorbed:
                        x, y, z = ux, uy, uz
                        break
                # settle on the wall at the normalized endpoint
                inv = 1.0 / sqrt(norm2)
                ux = nx * inv
                uy = ny * inv
                uz = nz * inv
                for j in range(n_traps):
                    if ux * centers[j, 0] + uy * centers[j, 1] + uz * centers[j, 2] > cos_radii[j]:
                        trap_index = j
                        absorbed = True
                        break
                x, y, z = ux, uy, uz
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
                if ux * centers[j, 0] + uy * centers[j, 1] + uz * centers[j, 2] > cos_radii[j]:
                    trap_index = j
                    absorbed = True
                    break
            if absorbed:
                x, y, z = ux, uy, uz
                break
            bounces += 1
            if bounces > bounce_cap:
                return (
                    BOUNCE_PATHOLOGY,
                    steps,
                    -1,
                    counts,
                    np.array([x, y, z]),
                    n_captured,
                )
            remaining = lam - alpha
            if remaining <= 1e-15:
                x, y, z = ux, uy, uz
                break
            ddn = (dx * ux + dy * uy + dz * uz) * inv
            rdx = dx * inv - 2.0 * ddn * ux
            rdy = dy * inv - 2.0 * ddn * uy
            rdz = dz * inv - 2.0 * ddn * uz
            dx = remaining * rdx
            dy = remaining * rdy
            dz = remaining * rdz
            x, y, z = ux, uy, uz

        r2 = x * x + y * y + z * z
        for m in range(n_layers):
            if r2 >= layer_thr2[m]:
                counts[m] += 1
        if capture_every > 0 and steps % capture_every == 0 and n_captured < cap_rows:
            capture_buf[n_captured, 0] = x
            capture_buf[n_captured, 1] = y
            capture_buf[n_captured, 2] = z
            n_captured += 1
        if absorbed:
            status = ABSORBED
            break

    return status, steps, trap_index, counts, np.array([x, y, z]), n_captured
