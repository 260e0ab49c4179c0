#!/usr/bin/env python3
"""Write a rectangular n10 layout with 6819 blank cells on a 224x224 canvas
(13.59% whitespace) to data/external/n10.layout, for post-processing runs.

Nine modules tile a full-width band at the bottom; the last module sits
alone above it.
"""
import os

G = 224
BLANK = 6819


def blocks(path):
    out = []
    for line in open(path):
        f = line.split()
        if len(f) >= 3 and f[1] == "softrectangular":
            out.append((f[0], float(f[2])))
    return out


def split(total, weights):
    s = sum(weights)
    cuts, acc = [], 0.0
    for w in weights:
        acc += w
        cuts.append(round(total * acc / s))
    return [b - a for a, b in zip([0] + cuts[:-1], cuts)]


def main():
    mods = blocks("data/gsrc/n10.blocks")
    covered = G * G - BLANK
    top_name, top_area = mods[-1]
    rest = mods[:-1]
    scale = covered / sum(a for _, a in mods)
    best = None
    for h in range(G):
        r = covered - G * h
        if r <= 0:
            break
        for th in range(1, G - h + 1):
            if r % th == 0 and r // th <= G:
                tw = r // th
                err = abs(r - top_area * scale) + 10 * abs(tw / th - 1)
                if best is None or err < best[0]:
                    best = (err, h, tw, th)
    _, band, tw, th = best
    rects = {}
    bands = [rest[0:3], rest[3:6], rest[6:9]]
    heights = split(band, [sum(a for _, a in b) for b in bands])
    y = 0
    for b, bh in zip(bands, heights):
        x = 0
        for (name, _), w in zip(b, split(G, [a for _, a in b])):
            rects[name] = (x, y, w, bh)
            x += w
        y += bh
    rects[top_name] = (0, band, tw, th)
    lines = ["FLORA-LAYOUT 1", f"canvas {G} {G}", "stage external"]
    for name, _ in mods:
        x, y, w, h = rects[name]
        lines.append(f"module {name} {h} 0")
        lines.extend(f"r {yy} {x} {w}" for yy in range(y, y + h))
    os.makedirs("data/external", exist_ok=True)
    with open("data/external/n10.layout", "w") as f:
        f.write("\n".join(lines) + "\n")
    used = sum(w * h for _, _, w, h in rects.values())
    print(f"covered {used}, blank {G * G - used}, top {tw}x{th} at y={band}")


if __name__ == "__main__":
    main()
