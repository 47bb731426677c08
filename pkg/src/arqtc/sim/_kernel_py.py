"""Pure numpy trial kernels.

Mirror of ``_kernel.pyx``: same draws in the same order from the same
per-trial streams.  Used when the compiled extension is unavailable.

Draw order within a trial:
  field     poisson count n, n uniforms for radius, n uniforms for angle
  per slot  1 uniform for the typical transmitter's ALOHA gate; if it
            transmits: n uniforms for interferer activity, one unit
            exponential per active interferer (in index order), one unit
            exponential for the desired link
With ``resample`` set, a fresh field is drawn at the start of every slot
instead of once per trial.
"""
import numpy as np

from ._streams import TrialStreams

TWO_PI = 2.0 * np.pi


def draw_field(gen, mean_count, disk_radius, center_x):
    n = gen.poisson(mean_count)
    ur = gen.random(n)
    ut = gen.random(n)
    rad = disk_radius * np.sqrt(ur)
    ang = TWO_PI * ut
    return center_x + rad * np.cos(ang), rad * np.sin(ang)


def _weights(x, y, rx, alpha):
    dx = x - rx
    return (dx * dx + y * y) ** (-0.5 * alpha)


def _slot_outage(gen, w, p, gain, offset):
    marks = gen.random(w.shape[0])
    active = marks < p
    fades = gen.standard_exponential(int(np.count_nonzero(active)))
    interference = float(np.dot(fades, w[active]))
    h0 = gen.standard_exponential()
    return not (h0 >= gain * interference + offset)


def run_trials(seed, start, stop, mean_count, disk_radius, center_x, rx_x, gain, offset,
               horizons, p, alpha, resample):
    """First successful slot per trial and hop (0 when the horizon runs out)."""
    n_hops = len(horizons)
    out = np.zeros((stop - start, n_hops), dtype=np.int32)
    streams = TrialStreams(seed)
    for row, trial in enumerate(range(start, stop)):
        gen = streams.reset(trial)
        if not resample:
            x, y = draw_field(gen, mean_count, disk_radius, center_x)
        for h in range(n_hops):
            if not resample:
                w = _weights(x, y, rx_x[h], alpha)
            for slot in range(1, horizons[h] + 1):
                if resample:
                    x, y = draw_field(gen, mean_count, disk_radius, center_x)
                    w = _weights(x, y, rx_x[h], alpha)
                if gen.random() >= p:
                    continue
                if not _slot_outage(gen, w, p, gain[h], offset[h]):
                    out[row, h] = slot
                    break
    return out


def run_outage_slots(seed, start, stop, mean_count, disk_radius, center_x, rx_x, gain, offset,
                     n_slots, p, alpha, resample):
    """SIR outage indicator of one link over ``n_slots`` slots, ignoring the typical gate."""
    out = np.zeros((stop - start, n_slots), dtype=np.uint8)
    streams = TrialStreams(seed)
    for row, trial in enumerate(range(start, stop)):
        gen = streams.reset(trial)
        if not resample:
            w = _weights(*draw_field(gen, mean_count, disk_radius, center_x), rx_x, alpha)
        for slot in range(n_slots):
            if resample:
                w = _weights(*draw_field(gen, mean_count, disk_radius, center_x), rx_x, alpha)
            out[row, slot] = _slot_outage(gen, w, p, gain, offset)
    return out
