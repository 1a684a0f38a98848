"""Direct-from-definition reference implementations.

Plain Python loops and ``statistics``; no numpy, nothing shared with the
package code they check.
"""

import math
import statistics


def naive_mean(xs):
    return math.fsum(xs) / len(xs)


def naive_sample_var(xs):
    m = naive_mean(xs)
    return math.fsum((x - m) ** 2 for x in xs) / (len(xs) - 1)


def naive_pooled_sd(sd1, n1, sd2, n2):
    return math.sqrt(((n1 - 1) * sd1 * sd1 + (n2 - 1) * sd2 * sd2) / (n1 + n2 - 2))


def naive_cohens_d(g1, g2):
    s = naive_pooled_sd(math.sqrt(naive_sample_var(g1)), len(g1), math.sqrt(naive_sample_var(g2)), len(g2))
    return (naive_mean(g1) - naive_mean(g2)) / s


def naive_odds(p):
    return p / (1 - p)


def naive_odds_ratio(a, b, c, d):
    if 0 in (a, b, c, d):
        a, b, c, d = a + 0.5, b + 0.5, c + 0.5, d + 0.5
    # odds of "present" within each group, from the group's probability
    p1 = a / (a + b)
    p2 = c / (c + d)
    return naive_odds(p1) / naive_odds(p2)


def naive_ols(xs, ys):
    n = len(xs)
    sx, sy = math.fsum(xs), math.fsum(ys)
    sxx = math.fsum(x * x for x in xs)
    sxy = math.fsum(x * y for x, y in zip(xs, ys))
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx)
    return slope, (sy - slope * sx) / n


def naive_r_squared(xs, ys):
    # 1 - SSE/SST of the least-squares line
    slope, intercept = naive_ols(xs, ys)
    my = naive_mean(ys)
    sse = math.fsum((y - intercept - slope * x) ** 2 for x, y in zip(xs, ys))
    sst = math.fsum((y - my) ** 2 for y in ys)
    return 1 - sse / sst


def stats_r_squared(xs, ys):
    return statistics.correlation(xs, ys) ** 2
