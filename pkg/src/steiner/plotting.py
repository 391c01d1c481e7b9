"""Deterministic SVG plots of report CSV files."""

import csv
import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

PLOT_KINDS = ("gap", "heatmap", "beta")

_RC = {
    "svg.hashsalt": "steiner",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "figure.dpi": 72,
}


class PlotError(ValueError):
    pass


def read_table(path):
    """Header and float columns of a CSV written by this package."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise PlotError(f"cannot read {path}: {exc.strerror}") from None
    if len(rows) < 2:
        raise PlotError(f"{path}: no data rows")
    header, body = rows[0], rows[1:]
    cols = {}
    for j, name in enumerate(header):
        vals = []
        for i, r in enumerate(body, start=2):
            if len(r) != len(header):
                raise PlotError(f"{path}: line {i} has {len(r)} fields, expected {len(header)}")
            try:
                vals.append(float(r[j]))
            except ValueError:
                vals.append(np.nan)
        cols[name] = np.array(vals)
    return header, cols


def _require(cols, names, path):
    missing = [n for n in names if n not in cols]
    if missing:
        raise PlotError(f"{path}: missing column(s) {', '.join(missing)}")


def _save(fig, out_path):
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    with open(out_path, "w", newline="\n") as fh:
        fh.write(buf.getvalue())


def plot_gap(cols, out_path, path="csv"):
    _require(cols, ["h", "gap"], path)
    h, gap = cols["h"], np.abs(cols["gap"])
    fig, ax = plt.subplots(figsize=(5, 4))
    ok = (h > 0) & (gap > 0)
    if ok.any():
        ax.loglog(h[ok], gap[ok], "o-", color="C0", label="|gap|")
        ax.loglog(h[ok], gap[ok][0] * h[ok] / h[ok][0], ":", color="0.5", label="slope 1")
    else:
        ax.plot(h, gap, "o-", color="C0", label="|gap|")
    ax.set_xlabel("h")
    ax.set_ylabel("|gap|")
    ax.legend()
    _save(fig, out_path)


def plot_heatmap(cols, out_path, path="csv"):
    _require(cols, ["i", "j", "u", "u_sigma"], path)
    i, j = cols["i"].astype(int), cols["j"].astype(int)
    shape = (i.max() + 1, j.max() + 1)
    fig, axes = plt.subplots(1, 2, figsize=(8, 4))
    vmax = max(np.nanmax(cols["u"]), np.nanmax(cols["u_sigma"]))
    for ax, key, title in zip(axes, ("u", "u_sigma"), ("u", "rearranged")):
        img = np.zeros(shape)
        img[i, j] = cols[key]
        ax.imshow(img.T, origin="lower", vmin=0.0, vmax=vmax, cmap="viridis", interpolation="nearest")
        ax.set_title(title)
        ax.set_xlabel("axis 0")
        ax.set_ylabel("axis 1")
    _save(fig, out_path)


def plot_beta(cols, header, out_path, path="csv"):
    betas = [c for c in header if c.startswith("beta_")]
    if not betas:
        raise PlotError(f"{path}: no beta_* columns")
    xname = "x0" if "x0" in cols else None
    x = cols[xname] if xname else np.arange(cols[betas[0]].size, dtype=float)
    fig, ax = plt.subplots(figsize=(5, 4))
    for n, b in enumerate(betas):
        ax.plot(x, cols[b], ".", color=f"C{n}", label=b)
    ax.set_xlabel(xname or "row")
    ax.set_ylabel("barycentre")
    ax.legend()
    _save(fig, out_path)


def plot_csv(csv_path, kind, out_path):
    """Render ``csv_path`` as an SVG of the given kind at ``out_path``."""
    if kind not in PLOT_KINDS:
        raise PlotError(f"unknown plot kind {kind!r}; choose from {list(PLOT_KINDS)}")
    header, cols = read_table(csv_path)
    with plt.rc_context(_RC):
        if kind == "gap":
            plot_gap(cols, out_path, csv_path)
        elif kind == "heatmap":
            plot_heatmap(cols, out_path, csv_path)
        else:
            plot_beta(cols, header, out_path, csv_path)
    return out_path
