//! Named parameter sets for the reference experiments.
//!
//! Grids and steps are the full-resolution ones; the acceptance suite overrides
//! them with coarser values to fit a desk budget.

pub const NAMES: &[&str] = &[
    "sec51",
    "sec52-case-i",
    "sec52-case-ii",
    "sec53",
    "sec53-case-b",
    "sec53-widths-b",
    "sec54-case-i",
    "sec54-case-ii",
];

type Entries = Vec<(&'static str, &'static str)>;

fn square(half: &'static str, neg: &'static str) -> Entries {
    vec![
        ("domain.x_min", neg),
        ("domain.x_max", half),
        ("domain.y_min", neg),
        ("domain.y_max", half),
    ]
}

fn traps(g1: (&'static str, &'static str), g2: (&'static str, &'static str)) -> Entries {
    vec![
        ("trap.1.gamma_x", g1.0),
        ("trap.1.gamma_y", g1.1),
        ("trap.2.gamma_x", g2.0),
        ("trap.2.gamma_y", g2.1),
    ]
}

fn beta(b11: &'static str, b12: &'static str, b22: &'static str) -> Entries {
    vec![("beta.11", b11), ("beta.12", b12), ("beta.22", b22)]
}

fn gaussian_pair() -> Entries {
    let mut e = square("16", "-16");
    e.extend([
        ("grid.h", "1/16"),
        ("time.dt", "1e-4"),
        ("time.t_end", "10"),
        ("time.sample_every", "1000"),
        ("omega", "0.4"),
        ("lambda", "1"),
        ("initial", "gaussian-pair"),
        ("converge.t_end", "2"),
        ("converge.dt_ladder", "1/40, 1/80, 1/160, 1/320, 1/640"),
        ("converge.dt_reference", "1/2560"),
        ("converge.h_ladder", "1, 1/2, 1/4, 1/8"),
        ("converge.h_reference", "1/16"),
    ]);
    e.extend(beta("51.5", "50", "48.5"));
    e.extend(traps(("1", "1"), ("1", "1")));
    e
}

fn mass_exchange(b12: &'static str, b22: &'static str) -> Entries {
    let mut e = square("8", "-8");
    e.extend([
        ("grid.h", "1/32"),
        ("time.dt", "1e-4"),
        ("time.t_end", "10"),
        ("time.sample_every", "1000"),
        ("omega", "0.6"),
        ("lambda", "1"),
        ("initial", "single-vortex"),
    ]);
    e.extend(beta("500", b12, b22));
    e.extend(traps(("1", "1"), ("1", "1")));
    e
}

fn vortex_pair(g2: (&'static str, &'static str)) -> Entries {
    let mut e = square("24", "-24");
    e.extend([
        ("grid.h", "3/64"),
        ("time.dt", "1e-4"),
        ("time.t_end", "5"),
        ("time.sample_every", "1000"),
        ("omega", "0.6"),
        ("lambda", "1"),
        ("initial", "vortex-pair"),
    ]);
    e.extend(beta("400", "388", "376"));
    e.extend(traps(("1", "1"), g2));
    e
}

fn lattice(lambda: &'static str, g1: (&'static str, &'static str), g2: (&'static str, &'static str)) -> Entries {
    let mut e = square("24", "-24");
    e.extend([
        ("grid.h", "3/32"),
        ("time.dt", "1e-4"),
        ("time.t_end", "5"),
        ("time.sample_every", "1000"),
        ("omega", "0.9"),
        ("lambda", lambda),
        ("initial", "dump"),
    ]);
    e.extend(beta("500", "-125", "500"));
    e.extend(traps(g1, g2));
    e
}

/// Entries of a preset in application order, later entries winning.
pub fn entries(name: &str) -> Option<Entries> {
    Some(match name {
        "sec51" => gaussian_pair(),
        "sec52-case-i" => mass_exchange("500", "500"),
        "sec52-case-ii" => mass_exchange("300", "400"),
        "sec53" => vortex_pair(("1", "1")),
        "sec53-case-b" => vortex_pair(("1.05", "0.9")),
        "sec53-widths-b" => vortex_pair(("1.2", "1.2")),
        "sec54-case-i" => lattice("0", ("1.05", "0.95"), ("0.95", "1.05")),
        "sec54-case-ii" => lattice("1", ("1", "1"), ("1", "1")),
        _ => return None,
    })
}
