# src/defaults.py


def get_model_defaults(n_spins: int = 1) -> dict:
    """Returns the Hamiltonian and dissipation parameters used in the reference runs."""
    return {
        # Spin fields
        "h": 1.0,
        "epsilon": 0.5,
        # Oscillator (two spins need a stiffer one to keep high levels empty)
        "omega": 4.0 if n_spins == 1 else 6.0,
        "lambda_c": 2.0,
        # Dissipation
        "gamma": 1.0,
        # Sizes
        "n_spins": n_spins,
        "d_ho": 4,
    }


def get_default_inputs(kind: str) -> dict:
    """Returns a complete experiment configuration for one experiment kind."""
    base = {
        "kind": kind,
        "model": get_model_defaults(),
        "code": "gray",
        "orders": [1, 2],
        "dt_grid": [0.2],
        "t_final": 2.0,  # evolve up to t = 2
        "xi_grid": [0.0],  # noiseless
        "gamma_grid": [1.0],
        "shots": None,  # exact expectations
        "seed": 0,
        "convention": "paper-collision",
        "calibration": None,  # bundled ibmq_jakarta averages
        "output_dir": "results",
        "workers": 1,
    }

    if kind == "trotter_sweep":
        base.update(
            {
                "dt_grid": [0.1, 0.2, 0.3, 0.4, 0.5],  # N = 20, 10, 7, 5, 4
                "gamma_grid": [0.0, 1.0],
            }
        )
    elif kind == "noise_sweep":
        base.update(
            {
                "orders": [2],
                "xi_grid": [0.01, 0.1, 1.0],
            }
        )
    elif kind == "infidelity_vs_time":
        base.update({"xi_grid": [0.01, 0.1, 1.0]})
    elif kind == "gamma_sweep":
        base.update(
            {
                "orders": [2],
                "xi_grid": [0.0, 0.01],
                "gamma_grid": [0.0, 0.5, 1.0, 1.5, 2.0, 2.5],
            }
        )
    elif kind == "observables":
        base.update({"xi_grid": [0.01, 0.1, 1.0]})
    elif kind == "correlations":
        base.update(
            {
                "model": get_model_defaults(n_spins=2),
                "xi_grid": [0.01, 0.1, 1.0],
            }
        )
    elif kind == "gate_counts":
        base.update(
            {
                # Every register that fits on the device
                "n_spins_grid": [1, 2],
                "d_ho_grid": [4, 8],
                "codes": ["gray", "standard_binary"],
            }
        )
    return base
