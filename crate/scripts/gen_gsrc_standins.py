#!/usr/bin/env python3
"""Write deterministic GSRC-format benchmark stand-ins.

Block, terminal, net and pin counts follow the headers of the public
GSRC n10..n300 and MCNC ami33/ami49 files; areas and connectivity are
synthetic. Output goes to data/gsrc/<design>.{blocks,nets}.
"""
import math
import os
import random

DESIGNS = {
    # name: (blocks, terminals, nets, pins, area sigma, hard)
    "n10": (10, 69, 118, 248, 0.6, False),
    "n30": (30, 212, 349, 749, 0.6, False),
    "n50": (50, 209, 485, 1050, 0.6, False),
    "n100": (100, 334, 885, 1873, 0.6, False),
    "n200": (200, 564, 1585, 3599, 0.6, False),
    "n300": (300, 569, 1893, 4358, 0.6, False),
    "ami33": (33, 42, 123, 480, 0.9, True),
    "ami49": (49, 22, 408, 953, 0.9, True),
}


def degrees(nets, pins, rng):
    deg = [2] * nets
    extra = pins - 2 * nets
    while extra > 0:
        i = rng.randrange(nets)
        if deg[i] < 12:
            deg[i] += 1
            extra -= 1
    return deg


def write(name, spec, out):
    nb, nt, nn, npins, sigma, hard = spec
    rng = random.Random("flora-" + name)
    blocks = [f"bk{i + 1}" for i in range(nb)]
    terms = [f"p{i + 1}" for i in range(nt)]
    # modules live on a hidden 2D layout so nets have locality
    pos = {b: (rng.random(), rng.random()) for b in blocks}
    with open(os.path.join(out, name + ".blocks"), "w") as f:
        f.write("UCSC blocks 1.0\n# stand-in generated by gen_gsrc_standins.py\n\n")
        f.write(f"NumSoftRectangularBlocks : {0 if hard else nb}\n")
        f.write(f"NumHardRectilinearBlocks : {nb if hard else 0}\n")
        f.write(f"NumTerminals : {nt}\n\n")
        for b in blocks:
            area = int(round(4000 * math.exp(rng.gauss(0, sigma))))
            if hard:
                ar = rng.uniform(0.5, 2.0)
                w = max(1, int(round(math.sqrt(area * ar))))
                h = max(1, int(round(area / w)))
                f.write(f"{b} hardrectilinear 4 (0, 0) (0, {h}) ({w}, {h}) ({w}, 0)\n")
            else:
                f.write(f"{b} softrectangular {area} 0.5 2.0\n")
        f.write("\n")
        for t in terms:
            f.write(f"{t} terminal\n")
    deg = degrees(nn, npins, rng)
    with open(os.path.join(out, name + ".nets"), "w") as f:
        f.write("UCLA nets 1.0\n# stand-in generated by gen_gsrc_standins.py\n\n")
        f.write(f"NumNets : {nn}\nNumPins : {npins}\n")
        for d in deg:
            anchor = rng.choice(blocks)
            ax, ay = pos[anchor]
            near = sorted(blocks, key=lambda b: (pos[b][0] - ax) ** 2 + (pos[b][1] - ay) ** 2)
            members = [anchor]
            for _ in range(d - 1):
                if rng.random() < 0.3:
                    members.append(rng.choice(terms))
                else:
                    members.append(near[min(len(near) - 1, int(rng.expovariate(0.5)))])
            f.write(f"NetDegree : {d}\n")
            for m in members:
                f.write(f"{m} B\n")


def main():
    out = os.path.join(os.path.dirname(__file__), "..", "data", "gsrc")
    os.makedirs(out, exist_ok=True)
    for name, spec in DESIGNS.items():
        write(name, spec, out)


if __name__ == "__main__":
    main()
