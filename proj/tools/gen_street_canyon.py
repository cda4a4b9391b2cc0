#!/usr/bin/env python3
# dcm - dynamic channel map built on a hybrid ray-tracing / stochastic channel model
# Copyright (C) 2026 The dcm authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ------------------------------------------------------------------------
"""Writes data/street_canyon.scn: a straight street between two rows of facades with parked cars."""
import sys

def quad(a, b, c, d):
    return [a, b, c, d]

def fmt(p):
    return ",".join(f"{v:g}" for v in p)

def main(path):
    facets = []
    # ground, 5 m x 10 m tiles over x in [-20, 60], y in [-10, 10]
    for i in range(16):
        x0, x1 = -20 + 5 * i, -15 + 5 * i
        for y0, y1 in ((-10, 0), (0, 10)):
            facets.append(("asphalt", quad((x0, y0, 0), (x1, y0, 0), (x1, y1, 0), (x0, y1, 0))))
    # facades on y = -10 and y = +10, 10 m blocks, two 10 m storeys
    for i in range(8):
        x0, x1 = -20 + 10 * i, -10 + 10 * i
        for z0, z1 in ((0, 10), (10, 20)):
            mat = "concrete" if z0 == 0 else "glass"
            facets.append((mat, quad((x0, -10, z0), (x1, -10, z0), (x1, -10, z1), (x0, -10, z1))))
            facets.append((mat, quad((x0, 10, z0), (x0, 10, z1), (x1, 10, z1), (x1, 10, z0))))
    # parked cars: 4 m x 1.8 m x 1.5 m boxes (roof and four sides)
    for i in range(10):
        x0 = -16 + 8 * i
        x1 = x0 + 4
        y0, y1 = (6.6, 8.4) if i % 2 == 0 else (-8.4, -6.6)
        z = 1.5
        facets.append(("metal", quad((x0, y0, z), (x1, y0, z), (x1, y1, z), (x0, y1, z))))
        facets.append(("metal", quad((x0, y0, 0), (x1, y0, 0), (x1, y0, z), (x0, y0, z))))
        facets.append(("metal", quad((x0, y1, 0), (x0, y1, z), (x1, y1, z), (x1, y1, 0))))
        facets.append(("metal", quad((x0, y0, 0), (x0, y0, z), (x0, y1, z), (x0, y1, 0))))
        facets.append(("metal", quad((x1, y0, 0), (x1, y1, 0), (x1, y1, z), (x1, y0, z))))
    with open(path, "w") as f:
        f.write("# street canyon: 80 m street, 20 m wide, facades 20 m high, parked cars\n")
        f.write("[material] name=concrete eps_r=5.31 sigma=0.13\n")
        f.write("[material] name=asphalt eps_r=5.31 sigma=0.13\n")
        f.write("[material] name=glass eps_r=6.31 sigma=0.035\n")
        f.write("[material] name=metal eps_r=1 sigma=inf\n")
        for mat, vs in facets:
            f.write(f"[facet] material={mat} v={';'.join(fmt(v) for v in vs)}\n")
    print(f"{len(facets)} facets", file=sys.stderr)

if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/street_canyon.scn")
