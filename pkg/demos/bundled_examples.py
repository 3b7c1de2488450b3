"""Load every bundled system, realize it three ways and audit a simulation.

Run with ``python demos/bundled_examples.py``.
"""
from phstruct import energy_audit, integrate, realize
from phstruct.catalog import example, example_names
from phstruct.phdae import ROUTES
from phstruct.systemfile import build_scenario, build_system


def main():
    for name in example_names():
        doc = example(name)
        system = build_system(doc)
        print(f"{name}: {doc['description']}")
        for route in ROUTES:
            real = realize(system, route)
            traj = integrate(build_scenario(doc, real))
            audit = energy_audit(traj)
            print(f"  {route:12s} {real.n_states:2d} states  H: {traj.H[0]:.4f} -> {traj.H[-1]:.4f}  "
                  f"{audit.summary()}")


if __name__ == "__main__":
    main()
