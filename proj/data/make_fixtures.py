"""Regenerates the bundled extended-XYZ fixtures.

Geometries are textbook-approximate small molecules. The U0 values of the
overfit set are synthetic: atomic reference energies plus a Morse-style
binding term over covalently bonded pairs, so the atomization part is a
smooth function of the geometry that a model can fit exactly.
"""
import math
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))

REFS = {"H": -13.6131, "C": -1029.8631, "N": -1485.3025, "O": -2042.6112, "F": -2713.4849}
RCOV = {"H": 0.31, "C": 0.76, "N": 0.71, "O": 0.66, "F": 0.57}


def tetra_hydrogens(center, bond, count, hxh_deg):
    # `count` hydrogens on a cone around -z with the given H-X-H angle
    lo, hi = 0.0, math.pi
    for _ in range(200):
        th = 0.5 * (lo + hi)
        a = [math.sin(th), 0.0, -math.cos(th)]
        b = [math.sin(th) * math.cos(2 * math.pi / count), math.sin(th) * math.sin(2 * math.pi / count), -math.cos(th)]
        ang = math.degrees(math.acos(sum(x * y for x, y in zip(a, b))))
        if ang < hxh_deg:
            lo = th
        else:
            hi = th
    out = []
    for k in range(count):
        phi = 2 * math.pi * k / count
        out.append(("H", [center[0] + bond * math.sin(th) * math.cos(phi),
                          center[1] + bond * math.sin(th) * math.sin(phi),
                          center[2] - bond * math.cos(th)]))
    return out


def water():
    half = math.radians(104.52 / 2)
    r = 0.9572
    return [("O", [0.0, 0.0, 0.0]),
            ("H", [0.0, r * math.sin(half), -r * math.cos(half)]),
            ("H", [0.0, -r * math.sin(half), -r * math.cos(half)])]


BASE = {
    "water": water(),
    "ammonia": [("N", [0.0, 0.0, 0.0])] + tetra_hydrogens([0, 0, 0], 1.012, 3, 106.7),
    "methane": [("C", [0.0, 0.0, 0.0])] + [("H", [1.089 * sx / math.sqrt(3), 1.089 * sy / math.sqrt(3), 1.089 * sz / math.sqrt(3)])
                                          for sx, sy, sz in [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]],
    "acetylene": [("H", [-1.663, 0, 0]), ("C", [-0.6015, 0, 0]), ("C", [0.6015, 0, 0]), ("H", [1.663, 0, 0])],
    "hcn": [("H", [-1.064, 0, 0]), ("C", [0.0, 0, 0]), ("N", [1.156, 0, 0])],
    "formaldehyde": [("C", [0, 0, 0]), ("O", [1.205, 0, 0]), ("H", [-0.5475, 0.9406, 0]), ("H", [-0.5475, -0.9406, 0])],
    "ethylene": [("C", [-0.6695, 0, 0]), ("C", [0.6695, 0, 0]), ("H", [-1.2321, 0.9289, 0]), ("H", [-1.2321, -0.9289, 0]),
                 ("H", [1.2321, 0.9289, 0]), ("H", [1.2321, -0.9289, 0])],
    "methanol": [("C", [0, 0, 0]), ("O", [1.427, 0, 0]), ("H", [1.75, 0.89, 0]), ("H", [-0.36, 1.03, 0]),
                 ("H", [-0.36, -0.51, 0.89]), ("H", [-0.36, -0.51, -0.89])],
    "hydrogen_fluoride": [("F", [0, 0, 0]), ("H", [0.917, 0, 0])],
    "ethane": [("C", [-0.765, 0, 0]), ("C", [0.765, 0, 0]),
               ("H", [-1.16, 1.02, 0]), ("H", [-1.16, -0.51, 0.883]), ("H", [-1.16, -0.51, -0.883]),
               ("H", [1.16, -1.02, 0]), ("H", [1.16, 0.51, 0.883]), ("H", [1.16, 0.51, -0.883])],
    "fluoromethane": [("C", [0, 0, 0]), ("F", [1.383, 0, 0]), ("H", [-0.36, 1.03, 0]),
                      ("H", [-0.36, -0.51, 0.89]), ("H", [-0.36, -0.51, -0.89])],
    "hydroxylamine": [("N", [0, 0, 0]), ("O", [1.453, 0, 0]), ("H", [1.70, 0.93, 0]),
                      ("H", [-0.33, 0.45, 0.83]), ("H", [-0.33, 0.45, -0.83])],
}


def bonds_of(atoms):
    out = []
    for i in range(len(atoms)):
        for j in range(i + 1, len(atoms)):
            d = math.dist(atoms[i][1], atoms[j][1])
            if d < RCOV[atoms[i][0]] + RCOV[atoms[j][0]] + 0.3:
                out.append((i, j, d))
    return out


def synthetic_u0(atoms):
    e = sum(REFS[s] for s, _ in atoms)
    for i, j, d in bonds_of(atoms):
        r0 = RCOV[atoms[i][0]] + RCOV[atoms[j][0]]
        depth = 3.0 + 0.5 * (len(atoms[i][0]) + len(atoms[j][0]))
        x = 1.0 - math.exp(-1.8 * (d - r0))
        e += -depth * (1.0 - x * x)
    return e


def write(path, atoms, props, with_bonds=False, digits=10):
    with open(path, "w") as f:
        f.write(f"{len(atoms)}\n")
        f.write(" ".join(f"{k}={v:.10f}" for k, v in props.items()) + "\n")
        for s, r in atoms:
            f.write(f"{s} " + " ".join(f"{c:.{digits}f}" for c in r) + "\n")
        if with_bonds:
            f.write("BONDS\n")
            for i, j, _ in bonds_of(atoms):
                f.write(f"{i} {j}\n")


def rigid_copy(atoms, seed):
    """Rotates by a random unit quaternion and translates."""
    rng = random.Random(seed)
    q = [rng.gauss(0.0, 1.0) for _ in range(4)]
    n = math.sqrt(sum(v * v for v in q))
    w, x, y, z = (v / n for v in q)
    rot = [[1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
           [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
           [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)]]
    shift = [rng.uniform(-5.0, 5.0) for _ in range(3)]
    return [(s, [sum(rot[i][k] * r[k] for k in range(3)) + shift[i] for i in range(3)]) for s, r in atoms]


def read_atoms(path):
    with open(path) as f:
        lines = f.read().splitlines()
    n = int(lines[0])
    return [(t[0], [float(v) for v in t[1:4]]) for t in (l.split() for l in lines[2:2 + n])]


def write_verify_inputs(fx):
    # rigid copies are built from the written (rounded) coordinates so that
    # they are equivalent to the fixture files, not to the unrounded input
    pairs = []
    for k, name in enumerate(["water", "methanol", "ethylene"]):
        atoms = rigid_copy(read_atoms(os.path.join(fx, name + ".xyz")), 7 + k)
        write(os.path.join(fx, name + "_rotated.xyz"), atoms, {"U0": synthetic_u0(atoms)},
              with_bonds=(name == "water"), digits=16)
        pairs.append(f"{name}.xyz {name}_rotated.xyz")
    with open(os.path.join(fx, "pairs.txt"), "w") as f:
        f.write("# rigid-equivalent pairs: predictions must agree\n" + "\n".join(pairs) + "\n")

    # same rotation as water_rotated, then one hydrogen nudged by 0.05 Angstrom
    atoms = rigid_copy(read_atoms(os.path.join(fx, "water.xyz")), 7)
    atoms[1][1][0] += 0.05
    write(os.path.join(fx, "water_tampered.xyz"), atoms, {"U0": synthetic_u0(atoms)},
          with_bonds=True, digits=16)
    with open(os.path.join(fx, "pairs_tampered.txt"), "w") as f:
        f.write("# declared equivalent, but one atom was moved\n"
                "water.xyz water_tampered.xyz\n")

    with open(os.path.join(fx, "verify.cfg"), "w") as f:
        f.write("manifest = manifest.txt\nverify_pairs = pairs.txt\nout = mxm_verify\n")
    with open(os.path.join(fx, "verify_tampered.cfg"), "w") as f:
        f.write("manifest = manifest.txt\nverify_pairs = pairs_tampered.txt\nout = mxm_verify_tampered\n")


OVERFIT_CFG = """\
# Small-model overfit run: 16 train / 2 validation / 2 test molecules.
manifest = manifest.txt
target = U0
atomrefs = ../atomrefs.txt
split_train = 0.8
split_validation = 0.1
split_test = 0.1
hidden = 32
layers = 2
group = 2
lr = 2e-3
decay_epochs = 100
ema_decay = 0.99
epochs = 300
patience = 300
seed = 1
out = mxm_overfit
"""


def main():
    fx = os.path.join(HERE, "fixtures")
    os.makedirs(fx, exist_ok=True)
    names = []
    for name, atoms in BASE.items():
        write(os.path.join(fx, name + ".xyz"), atoms, {"U0": synthetic_u0(atoms)}, with_bonds=(name == "water"))
        names.append(name + ".xyz")
    # hydrogen molecule with a hand-picked total energy (Hartree-like units)
    write(os.path.join(fx, "h2.xyz"), [("H", [0.0, 0.0, 0.0]), ("H", [0.74, 0.0, 0.0])], {"U0": -1.17})
    with open(os.path.join(fx, "manifest.txt"), "w") as f:
        f.write("\n".join(names) + "\n")

    write_verify_inputs(fx)

    rng = random.Random(20210101)
    ov = os.path.join(HERE, "overfit")
    os.makedirs(ov, exist_ok=True)
    listing = []
    keys = list(BASE)
    for k in range(20):
        name = keys[k % len(keys)]
        atoms = [(s, [c + rng.gauss(0.0, 0.04) for c in r]) for s, r in BASE[name]]
        fname = f"{k:02d}_{name}.xyz"
        write(os.path.join(ov, fname), atoms, {"U0": synthetic_u0(atoms)})
        listing.append(fname)
    with open(os.path.join(ov, "manifest.txt"), "w") as f:
        f.write("\n".join(listing) + "\n")

    with open(os.path.join(ov, "train.cfg"), "w") as f:
        f.write(OVERFIT_CFG)

    with open(os.path.join(HERE, "atomrefs.txt"), "w") as f:
        for s, v in REFS.items():
            f.write(f"{s} {v}\n")


if __name__ == "__main__":
    main()
