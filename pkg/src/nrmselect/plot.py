"""Static SVG rendering of a rank-vs-lambda sweep.

Hand-written SVG keeps the output byte-stable across runs and platforms.
"""

from xml.sax.saxutils import escape

WIDTH, HEIGHT = 720, 420
LEFT, RIGHT, TOP, BOTTOM = 64, 24, 32, 52


def _num(x):
    return f"{x:.2f}"


class _Axes:
    def __init__(self, xmin, xmax, ymax):
        if xmax <= xmin:
            pad = abs(xmin) * 0.05 or 1.0
            xmin, xmax = xmin - pad, xmax + pad
        self.xmin, self.xmax = xmin, xmax
        self.ymax = max(ymax, 1)

    def x(self, lam):
        w = WIDTH - LEFT - RIGHT
        return LEFT + (lam - self.xmin) / (self.xmax - self.xmin) * w

    def y(self, rank):
        h = HEIGHT - TOP - BOTTOM
        return TOP + h - rank / self.ymax * h


def step_points(rows, axes):
    """Vertices of the solved-rank step curve, ordered by increasing lambda."""
    pts = sorted((r.lam, r.solved_rank) for r in rows)
    out = []
    for i, (lam, rank) in enumerate(pts):
        if i:
            out.append((axes.x(lam), axes.y(pts[i - 1][1])))
        out.append((axes.x(lam), axes.y(rank)))
    return out


def render_svg(rows, lambda_max=None, boundaries=(), title="rank vs lambda"):
    """Return the SVG document as a string.

    Parameters
    ----------
    rows : sequence of SweepRow
    lambda_max : float, optional
        Drawn as a solid vertical line when given.
    boundaries : sequence of (label, lambda)
        Closed-form sequence values, drawn as dashed vertical lines when they
        fall inside the plotted range.
    """
    if not rows:
        raise ValueError("need at least one row to plot")
    lams = [r.lam for r in rows]
    xmin, xmax = min(lams), max(lams)
    if lambda_max is not None:
        xmax = max(xmax, lambda_max)
    ymax = max([r.solved_rank for r in rows]
               + [r.certified_bound for r in rows if r.certified_bound is not None])
    ax = _Axes(xmin, xmax, ymax)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="20" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14">{escape(title)}</text>',
    ]
    x0, x1 = LEFT, WIDTH - RIGHT
    y0, y1 = HEIGHT - BOTTOM, TOP
    out.append(f'<g id="axes" stroke="black" stroke-width="1">'
               f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>'
               f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>')
    ticks = ['<g id="ticks" font-family="sans-serif" font-size="11">']
    for i in range(6):
        lam = ax.xmin + (ax.xmax - ax.xmin) * i / 5
        ticks.append(f'<text x="{_num(ax.x(lam))}" y="{y0 + 16}" text-anchor="middle">{lam:.4g}</text>')
    ystep = max(1, -(-ax.ymax // 8))
    for rank in range(0, ax.ymax + 1, ystep):
        ticks.append(f'<text x="{x0 - 6}" y="{_num(ax.y(rank) + 4)}" text-anchor="end">{rank}</text>')
    ticks.append(f'<text x="{(x0 + x1) / 2:.0f}" y="{HEIGHT - 12}" text-anchor="middle">lambda</text>')
    ticks.append(f'<text x="16" y="{(y0 + y1) / 2:.0f}" text-anchor="middle" '
                 f'transform="rotate(-90 16 {(y0 + y1) / 2:.0f})">rank</text>')
    ticks.append('</g>')
    out.extend(ticks)

    lines = []
    for label, lam in boundaries:
        if ax.xmin <= lam <= ax.xmax:
            xs = _num(ax.x(lam))
            lines.append(f'<line x1="{xs}" y1="{y0}" x2="{xs}" y2="{y1}" stroke="gray" '
                         f'stroke-dasharray="4 3"><title>{escape(label)}={lam!r}</title></line>')
    if lambda_max is not None:
        xs = _num(ax.x(lambda_max))
        lines.append(f'<line x1="{xs}" y1="{y0}" x2="{xs}" y2="{y1}" stroke="black">'
                     f'<title>lambda_max={lambda_max!r}</title></line>')
    if lines:
        out.append('<g id="sequence">' + "".join(lines) + '</g>')

    pts = step_points(rows, ax)
    if len(pts) > 1:
        d = " ".join(f"{_num(px)},{_num(py)}" for px, py in pts)
        out.append(f'<polyline id="solved-rank" fill="none" stroke="#1f77b4" '
                   f'stroke-width="2" points="{d}"/>')
    dots = ['<g id="solved-points" fill="#1f77b4">']
    for r in sorted(rows, key=lambda r: r.lam):
        dots.append(f'<circle cx="{_num(ax.x(r.lam))}" cy="{_num(ax.y(r.solved_rank))}" r="3"/>')
    dots.append('</g>')
    out.extend(dots)

    certified = [r for r in sorted(rows, key=lambda r: r.lam) if r.certified_bound is not None]
    if certified:
        marks = ['<g id="certificates" fill="none" stroke="#d62728" stroke-width="1.5">']
        for r in certified:
            cx, cy = ax.x(r.lam), ax.y(r.certified_bound)
            marks.append(f'<path d="M{_num(cx - 5)},{_num(cy - 4)} L{_num(cx + 5)},{_num(cy - 4)} '
                         f'L{_num(cx)},{_num(cy + 4)} Z"/>')
        marks.append('</g>')
        out.extend(marks)
    out.append('</svg>')
    return "\n".join(out) + "\n"


def emit_plot(rows, path, lambda_max=None, boundaries=(), title="rank vs lambda"):
    svg = render_svg(rows, lambda_max=lambda_max, boundaries=boundaries, title=title)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
