"""Built-in example systems.

Each constructor returns a fresh System (with its own machine).  The
`expected` block holds regression values, each as (value, provenance) where
provenance is "published" for values stated in the literature and "derived"
for values obtained by an independent computation.
"""

from __future__ import annotations

from importlib import resources

from .localmap import union
from .sft import Shift, VertexGraph
from .sysfile import System, make_system


def adding_machine() -> System:
    g = VertexGraph.build(["v"], [("0", "v", "v"), ("1", "v", "v")])
    return make_system(
        "adding-machine",
        Shift.edge_shift(g),
        {"a": [("0", "1", "1"), ("1", "0", "a")]},
        expected={
            "nucleus_size": (3, "derived"),
            "n0": (1, "derived"),
            "sigma0": ([[2]], "published"),
            "H0": ("Z[1/2]", "published"),
        },
    )


def golden_rotation(encoding: str = "01") -> System:
    """The golden mean rotation on the shift without 11.

    "01": the Markov shift on {0, 1} with generators R0, R1.
    "edge": its width-2 block code (edges 0_0, 0_1, 1_0) with generators A, B, C,
    where R0 corresponds to A and R1 to the union of B and C.
    """
    if encoding == "01":
        return make_system(
            "golden-rotation",
            Shift.markov(["0", "1"], ["11"]),
            {
                "R0": [("0", "1", "I[0]")],
                "R1": [("0", "0", "R0^-1"), ("1", "0", "R1^-1")],
            },
            expected={
                "nucleus_size": (6, "published"),
                "n0": (2, "published"),
                "sigma0": ([[1, 1], [1, 0]], "published"),
                "H0": ("Z^2", "published"),
                "H1": ("Z", "published"),
            },
        )
    if encoding == "edge":
        g = VertexGraph.build(
            ["0", "1"], [("0_0", "0", "0"), ("0_1", "0", "1"), ("1_0", "1", "0")]
        )
        return make_system(
            "golden-rotation-edge",
            Shift.edge_shift(g),
            {
                "A": [("0_0", "1_0", "1")],
                "B": [("0_1", "0_0", "A^-1")],
                "C": [("1_0", "0_0", "B^-1"), ("1_0", "0_1", "C^-1")],
            },
            expected={
                "sigma0": ([[1, 1], [1, 0]], "published"),
                "H0": ("Z^2", "published"),
                "H1": ("Z", "published"),
            },
        )
    raise ValueError(f"unknown encoding {encoding!r}")


PENROSE_EDGES = [
    ("0_0", "0", "0"),
    ("0_1", "0", "1"),
    ("1_0", "1", "0"),
    ("1_1", "1", "1"),
    ("2", "1", "1"),
]

PENROSE_GENERATORS = ["A0", "A1", "A2", "B", "C", "D00", "D01", "D10", "D11"]


def penrose() -> System:
    """The Kellendonk semigroup of the Penrose tiling on the 5-edge graph."""
    g = VertexGraph.build(["0", "1"], PENROSE_EDGES)
    tables = {
        "A0": [("0_0", "1_0", "1"), ("0_1", "1_1", "1")],
        "A1": [("1_0", "0_0", "1"), ("1_1", "0_1", "1")],
        "A2": [("2", "2", "C")],
        "B": [
            ("0_0", "0_0", "D00"),
            ("0_1", "0_0", "D01"),
            ("0_0", "0_1", "D10"),
            ("0_1", "0_1", "D11"),
        ],
        "C": [("1_0", "1_0", "B"), ("1_1", "2", "1"), ("2", "1_1", "1")],
        "D00": [("0_1", "0_1", "C")],
        "D01": [("2", "0_0", "A1")],
        "D10": [("0_0", "2", "A0")],
        "D11": [
            ("1_0", "1_0", "D00"),
            ("1_1", "1_0", "D01"),
            ("1_0", "1_1", "D10"),
            ("1_1", "1_1", "D11"),
            ("2", "2", "A2"),
        ],
    }
    return make_system(
        "penrose",
        Shift.edge_shift(g),
        tables,
        expected={
            "sigma0": ([[1, 1], [1, 2]], "published"),
            "H0": ("Z^2", "published"),
            "H1": ("(Z/2)^3", "published"),
            "H0_mod2": ("(Z/2)^2", "published"),
            "AD_order": (280, "published"),
        },
    )


def penrose_reflections(sys_: System) -> tuple:
    """The total maps A = A0 + A1 + A2 and D = D00 + D01 + D10 + D11."""
    a = union(*(sys_.gen(n) for n in ("A0", "A1", "A2")))
    d = union(*(sys_.gen(n) for n in ("D00", "D01", "D10", "D11")))
    return a, d


INTERMEDIATE_GENERATORS = ["b0", "c0", "d0", "b1", "c1", "d1", "b2", "c2", "d2"]


def intermediate_growth() -> System:
    """Nine maps on the shift without 11 whose full group has intermediate growth.

    x2 acts on 1w and x1 on 0w as single-letter shifts of the next map in
    the cycle x2 -> x1 -> x0; the x0 maps swap 00 and 10 (b0, c0) or fix
    them (d0), and pass 010w to the next map of the cycle b -> c -> d -> b.
    """
    tables = {
        "b0": [("0", "1", "I[0]"), ("1", "0", "I[0]"), ("0", "0", "c2")],
        "c0": [("0", "1", "I[0]"), ("1", "0", "I[0]"), ("0", "0", "d2")],
        "d0": [("0", "0", "I[0] + b2"), ("1", "1", "I[0]")],
        "b1": [("0", "0", "b0")],
        "c1": [("0", "0", "c0")],
        "d1": [("0", "0", "d0")],
        "b2": [("1", "1", "b1")],
        "c2": [("1", "1", "c1")],
        "d2": [("1", "1", "d1")],
    }
    return make_system(
        "intermediate-growth",
        Shift.markov(["0", "1"], ["11"]),
        tables,
        expected={
            "domains": (
                {"b0": "full", "c0": "full", "d0": "full",
                 "b1": "0", "c1": "0", "d1": "0",
                 "b2": "1", "c2": "1", "d2": "1"},
                "published",
            ),
        },
    )


GALLERY = {
    "adding-machine": adding_machine,
    "golden-rotation": golden_rotation,
    "golden-rotation-edge": lambda: golden_rotation("edge"),
    "penrose": penrose,
    "intermediate-growth": intermediate_growth,
}


def get(name: str) -> System:
    try:
        return GALLERY[name]()
    except KeyError:
        raise KeyError(f"unknown gallery system {name!r}; known: {', '.join(sorted(GALLERY))}") from None


def system_file(name: str) -> str:
    """Text of the shipped system file for a gallery system."""
    if name not in GALLERY:
        raise KeyError(f"unknown gallery system {name!r}")
    return resources.files("selfsim").joinpath("systems", f"{name}.sys").read_text(encoding="utf-8")
