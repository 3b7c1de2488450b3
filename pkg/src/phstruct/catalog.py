"""Bundled example systems, returned as system-file documents."""
from __future__ import annotations

__all__ = ["EXAMPLES", "example", "example_names"]


def _classical():
    # xdot = J0 e - g f_R + b u, e_R = g^T e, y = b^T e, f_R = c e_R
    return {
        "description": "two-state oscillator with one damper, P = I, energy matrix diag(2, 1)",
        "layout": {"n": 2, "r": 1, "p": 1},
        "structures": {
            "D": {
                "kind": "dirac", "representation": "kernel",
                "matrices": {
                    "K": [[1, 0], [0, 1], [0, 0], [0, 0]],
                    "L": [[0, 1], [-1, 0], [0, -1], [0, -1]],
                    "K_R": [[0], [1], [0], [0]],
                    "L_R": [[0], [0], [1], [0]],
                    "K_P": [[0], [0], [0], [1]],
                    "L_P": [[0], [1], [0], [0]],
                },
            },
            "L": {"kind": "lagrange", "representation": "PS",
                  "matrices": {"P": [[1, 0], [0, 1]], "S": [[2, 0], [0, 1]]}},
            "R": {"kind": "resistive", "representation": "graph", "matrices": {"M": [[0.5]]}},
        },
        "system": {"type": "DLR", "D": "D", "L": "L", "R": "R"},
        "scenario": {"h": 0.01, "t_end": 10.0,
                     "input": {"times": [0, 1, 1, 10], "values": [[0], [0], [1], [1]]},
                     "initial_guess": [1, 0], "method": "implicit_midpoint"},
    }


def _constrained():
    # singular P: the second state is tied to the first by 2 z2 = z1
    return {
        "description": "two states with singular P = diag(1, 0); transfer function 1/(s + 1.5)",
        "layout": {"n": 2, "r": 0, "p": 1},
        "structures": {
            "M": {"kind": "monotone", "representation": "graph",
                  "matrices": {"M": [[1, 1, -1], [-1, 2, 0], [1, 0, 0]]}},
            "L": {"kind": "lagrange", "representation": "PS",
                  "matrices": {"P": [[1, 0], [0, 0]], "S": [[1, 0], [0, 1]]}},
        },
        "system": {"type": "ML", "M": "M", "L": "L"},
        "scenario": {"h": 0.01, "t_end": 5.0,
                     "input": {"times": [0, 1, 5], "values": [[0], [1], [1]]},
                     "initial_guess": [1, 0.5], "method": "implicit_midpoint"},
    }


def _rc():
    # xdot = -f_R + u, e_R = e, y = e, f_R = 2 e_R: transfer 1/(s + 2)
    return {
        "description": "one capacitor, one resistor (r = 2); transfer function 1/(s + 2)",
        "layout": {"n": 1, "r": 1, "p": 1},
        "structures": {
            "D": {
                "kind": "dirac", "representation": "kernel",
                "matrices": {
                    "K": [[1], [0], [0]], "L": [[0], [-1], [-1]],
                    "K_R": [[1], [0], [0]], "L_R": [[0], [1], [0]],
                    "K_P": [[0], [0], [1]], "L_P": [[1], [0], [0]],
                },
            },
            "L": {"kind": "lagrange", "representation": "PS",
                  "matrices": {"P": [[1]], "S": [[1]]}},
            "R": {"kind": "resistive", "representation": "PS",
                  "matrices": {"P": [[2]], "S": [[1]]}},
        },
        "system": {"type": "DLR", "D": "D", "L": "L", "R": "R"},
        "scenario": {"h": 0.01, "t_end": 5.0,
                     "input": {"times": [0, 5], "values": [[1], [1]]},
                     "initial_guess": [0], "method": "implicit_midpoint"},
    }


def _lossless_rotation():
    return {
        "description": "undamped rotation xdot = J x with one port, driven by zero input",
        "layout": {"n": 2, "r": 0, "p": 1},
        "structures": {
            "M": {"kind": "dirac", "representation": "graph",
                  "matrices": {"M": [[0, -1, -1], [1, 0, 0], [1, 0, 0]]}},
            "L": {"kind": "lagrange", "representation": "PS",
                  "matrices": {"P": [[1, 0], [0, 1]], "S": [[1, 0], [0, 1]]}},
        },
        "system": {"type": "ML", "M": "M", "L": "L"},
        "scenario": {"h": 0.01, "t_end": 10.0,
                     "input": {"times": [0], "values": [[0]]},
                     "initial_guess": [1, 0], "method": "implicit_midpoint"},
    }


def _monotone_mixed():
    # f1 = e1, f2 free, e2 = 0
    return {
        "description": "monotone structure with a free flow and a zero effort (needs a multiplier)",
        "layout": {"n": 2, "r": 0, "p": 0},
        "structures": {
            "M": {"kind": "monotone", "representation": "image",
                  "matrices": {"Z": [[1, 0], [0, 1]], "Y": [[1, 0], [0, 0]]}},
            "L": {"kind": "lagrange", "representation": "PS",
                  "matrices": {"P": [[1, 0], [0, 1]], "S": [[1, 0], [0, 1]]}},
        },
        "system": {"type": "ML", "M": "M", "L": "L"},
        "scenario": {"h": 0.01, "t_end": 5.0, "initial_guess": [1, 0],
                     "method": "implicit_midpoint"},
    }


EXAMPLES = {
    "classical": _classical,
    "constrained": _constrained,
    "rc": _rc,
    "lossless-rotation": _lossless_rotation,
    "monotone-mixed": _monotone_mixed,
}


def example_names():
    return tuple(EXAMPLES)


def example(name):
    """Fresh copy of a bundled document."""
    try:
        return EXAMPLES[name]()
    except KeyError:
        raise KeyError(f"unknown example {name!r}; available: {', '.join(EXAMPLES)}") from None
