"""Independent reference implementations the tests compare against."""

import math
from collections import Counter
from fractions import Fraction
from itertools import product


# Calendar: proleptic Gregorian day numbers by pure arithmetic.
def days_from_civil(y, m, d):
    y -= m <= 2
    era = (y if y >= 0 else y - 399) // 400
    yoe = y - era * 400
    doy = (153 * (m + (-3 if m > 2 else 9)) + 2) // 5 + d - 1
    doe = yoe * 365 + yoe // 4 - yoe // 100 + doy
    return era * 146097 + doe - 719468


def civil_from_days(z):
    z += 719468
    era = (z if z >= 0 else z - 146096) // 146097
    doe = z - era * 146097
    yoe = (doe - doe // 1460 + doe // 36524 - doe // 146096) // 365
    y = yoe + era * 400
    doy = doe - (365 * yoe + yoe // 4 - yoe // 100)
    mp = (5 * doy + 2) // 153
    d = doy - (153 * mp + 2) // 5 + 1
    m = mp + (3 if mp < 10 else -9)
    return y + (m <= 2), m, d


def oracle(date: str, time: str | None, days: int, seconds: int):
    y, m, d = int(date[:4]), int(date[4:6]), int(date[6:])
    if time is None or seconds == 0:
        return "%04d%02d%02d" % civil_from_days(days_from_civil(y, m, d) + days), time
    t = int(time[:2]) * 3600 + int(time[2:4]) * 60 + int(time[4:6])
    total = (days_from_civil(y, m, d) + days) * 86400 + t + seconds
    day, sec = divmod(total, 86400)
    return "%04d%02d%02d" % civil_from_days(day), "%02d%02d%02d" % (sec // 3600, sec // 60 % 60, sec % 60)


def gen(value, level, spec):
    kind, param = spec
    top = 1 + len(param)
    if level == 0:
        return value
    if level >= top:
        return "*"
    if value is None:
        return None
    if kind == "NUMERIC":
        w = param[level - 1]
        lo = (value // w) * w
        return (lo, lo + w)
    v = value
    for m in param[:level]:
        v = m.get(v, v)
    return v


def brute_force(rows, specs, threshold, max_sup):
    k = math.ceil(1 / threshold)
    tops = [1 + len(p) for _, p in specs]
    n, ncols = len(rows), len(specs)
    best = None
    for node in product(*(range(t + 1) for t in tops)):
        keys = [tuple(gen(v, lv, s) for v, lv, s in zip(r, node, specs)) for r in rows]
        sizes = Counter(keys)
        sup = {i for i, key in enumerate(keys) if sizes[key] < k}
        if n and Fraction(len(sup), n) > max_sup:
            continue
        per_row = sum(Fraction(lv, t) for lv, t in zip(node, tops))
        loss = (per_row * (n - len(sup)) + ncols * len(sup)) / (ncols * n) if n and ncols else Fraction(0)
        cand = (sum(node), loss, node)
        if best is None or cand < best:
            best = (sum(node), loss, node, frozenset(sup))
    return best


