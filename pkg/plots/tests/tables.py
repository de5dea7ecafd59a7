"""Small synthetic scenario tables for render tests."""

from pathlib import Path

_TABLES: dict[str, list[str]] = {
    "landscape": [
        "gamma;c;p_mc",
        "0;0.1;0.001", "0.4;0.1;0.002", "0.8;0.1;0.0015",
        "0;0.2;0.01", "0.4;0.2;0.04", "0.8;0.2;0.02",
    ],
    "improvement": [
        "lambda_max;gamma_star;p_gbs;p_dgbs;improvement",
        "0.2;0.9;1e-05;9e-05;9",
        "0.4;0.6;0.0004;0.0012;3",
        "0.6;0;0.002;0.002;1",
    ],
    "loss-prob": [
        "eta;gamma;p_mc",
        "0.5;0;0.0002", "0.5;0.4;0.0009", "0.5;0.8;0.0006",
        "1;0;0.001", "1;0.4;0.003", "1;0.8;0.002",
    ],
    "success-rate": [
        "sampler;rate;ci_low;ci_high;repeats;n_samples;n_sqz;n_disp",
        "dgbs;0.55;0.52;0.58;20;500;1.56;6.67",
        "gbs;0.31;0.28;0.34;20;500;1.56;6.67",
        "uniform;0.21;0.18;0.24;20;500;1.56;6.67",
        "oh;0.30;0.27;0.33;20;500;1.56;6.67",
    ],
    "loss-success": [
        "eta;sampler;rate;ci_low;ci_high;repeats;n_samples;n_sqz;n_disp",
        "0.5;dgbs;0.69;0.66;0.72;10;2000;1.17;5",
        "1;dgbs;0.70;0.67;0.73;10;2000;1.17;5",
    ],
    "entropy": [
        "gamma;entropy;p_mc_cond",
        "0;9.8;0.004", "0.5;11.9;0.003", "1;13.1;0.002",
    ],
    "scaling": [
        "nodes;clique_size;improvement;gamma_star;loop_strength;n_disp;n_sqz;ratio",
        "8;4;1.5;0.79;0.31;2.3;0.52;4.5",
        "12;6;3.8;1.07;0.33;4.0;0.50;8.1",
        "16;8;9.9;1.27;0.34;5.5;0.49;11.2",
    ],
}


def write_table(scenario: str, path: Path) -> Path:
    path.write_text("\n".join(_TABLES[scenario]) + "\n")
    return path
