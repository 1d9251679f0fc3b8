use kfbi::bie::ProblemKind;
use kfbi::harness::{
    dump_field, emit_table, manufacture, preset, presets, run_example, run_single, ConvergenceRow,
    ExactId, ExperimentConfig, TABLE_HEADER,
};
use kfbi::KfbiError;

fn small(name: &str, grids: Vec<usize>) -> ExperimentConfig {
    let mut cfg = preset(name).unwrap().config;
    cfg.grids = grids;
    cfg
}

#[test]
fn catalog_covers_every_example() {
    let names: Vec<String> = presets().into_iter().map(|p| p.config.name).collect();
    for prefix in ["ex1-", "ex2-", "ex3-", "ex4-", "ex5-", "ex6-"] {
        assert!(names.iter().any(|n| n.starts_with(prefix)), "{prefix}");
    }
    let kinds: Vec<ProblemKind> = presets().into_iter().map(|p| p.config.problem).collect();
    for k in [
        ProblemKind::DirichletBvp,
        ProblemKind::NeumannBvp,
        ProblemKind::InterfaceEqualRatio,
        ProblemKind::InterfaceGeneric,
    ] {
        assert!(kinds.contains(&k), "{k:?}");
    }
    for p in presets() {
        p.config.validate().unwrap();
    }
}

#[test]
fn presets_roundtrip_through_toml() {
    for p in presets() {
        let text = p.config.to_toml().unwrap();
        assert_eq!(
            ExperimentConfig::from_toml(&text).unwrap(),
            p.config,
            "{text}"
        );
    }
}

#[test]
fn config_validation() {
    let base = preset("ex2-helicoid").unwrap().config.to_toml().unwrap();
    let bad_grid = base.replace("grids = [64, 128, 256]", "grids = [64, 100]");
    assert!(matches!(
        ExperimentConfig::from_toml(&bad_grid),
        Err(KfbiError::Config(_))
    ));
    let tiny = base.replace("grids = [64, 128, 256]", "grids = [16]");
    assert!(matches!(
        ExperimentConfig::from_toml(&tiny),
        Err(KfbiError::Config(_))
    ));
    let unknown = format!("colour = \"red\"\n{base}");
    assert!(matches!(
        ExperimentConfig::from_toml(&unknown),
        Err(KfbiError::Config(_))
    ));
    let bad_exact = base.replace("exact = \"helicoid\"", "exact = \"nope\"");
    assert!(matches!(
        ExperimentConfig::from_toml(&bad_exact),
        Err(KfbiError::Config(_))
    ));
    let cfg = small("ex2-helicoid", vec![64]);
    assert!(matches!(run_single(&cfg, 96), Err(KfbiError::Config(_))));
}

#[test]
fn zero_solution_is_reproduced() {
    for name in [
        "ex1-dirichlet",
        "ex1-neumann",
        "ex3-q-0.5",
        "ex4-paraboloid",
    ] {
        let mut cfg = small(name, vec![32, 64]);
        if name == "ex3-q-0.5" || name == "ex4-paraboloid" {
            cfg.grids = vec![64];
        }
        cfg.exact = ExactId::Zero;
        for row in run_example(&cfg).unwrap() {
            assert!(row.failure.is_none(), "{name}: {:?}", row.failure);
            assert!(row.max_error <= 1e-9, "{name}: {}", row.max_error);
        }
    }
}

#[test]
fn sweeps_are_deterministic() {
    let cfg = small("ex4-paraboloid", vec![64, 128]);
    let strip = |rows: Vec<ConvergenceRow>| -> Vec<ConvergenceRow> {
        rows.into_iter()
            .map(|mut r| {
                r.cpu_seconds = 0.0;
                r
            })
            .collect()
    };
    let a = strip(run_example(&cfg).unwrap());
    let mut par = cfg.clone();
    par.parallel_rows = true;
    let b = strip(run_example(&par).unwrap());
    assert_eq!(a.len(), 2);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.max_error.to_bits(), y.max_error.to_bits());
        assert_eq!(x, y);
    }
}

#[test]
fn failing_rows_are_recorded_not_fatal() {
    // a 32-grid cannot resolve the saddle star's clearance; 64 can
    let cfg = small("ex3-q-0.5", vec![32, 64]);
    let rows = run_example(&cfg).unwrap();
    assert!(rows[0].failure.is_some());
    assert!(rows[0].max_error.is_nan());
    assert!(rows[1].failure.is_none());
    assert!(rows[1].observed_order.is_none());
}

#[test]
fn dirichlet_trace_reproduces_boundary_data() {
    let cfg = small("ex1-dirichlet", vec![64]);
    let mut errs = Vec::new();
    for n in [64, 128] {
        let out = run_single(&cfg, n).unwrap();
        let surface = cfg.surface.build();
        let spec = manufacture(&cfg, &surface, &out.context).unwrap().spec;
        let bv = &out.solution.boundary_values;
        errs.push(
            bv.trace_plus
                .iter()
                .zip(&spec.g1)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())),
        );
    }
    // the discrete equation imposes the trace directly, so only the GMRES
    // tolerance separates them
    assert!(errs.iter().all(|&e| e < 1e-6), "{errs:?}");
}

#[test]
fn interface_solutions_satisfy_jump_conditions() {
    for name in ["ex3-q-0.5", "ex4-paraboloid"] {
        let cfg = small(name, vec![128]);
        let out = run_single(&cfg, 128).unwrap();
        let surface = cfg.surface.build();
        let spec = manufacture(&cfg, &surface, &out.context).unwrap().spec;
        let bv = &out.solution.boundary_values;
        let mut e1: f64 = 0.0;
        let mut e2: f64 = 0.0;
        let scale2 = spec.g2.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for l in 0..out.m {
            e1 = e1.max((bv.trace_plus[l] - bv.trace_minus[l] - spec.g1[l]).abs());
            let flux = cfg.beta_plus * bv.dnu_plus[l] - cfg.beta_minus * bv.dnu_minus[l];
            e2 = e2.max((flux - spec.g2[l]).abs() / scale2);
        }
        assert!(e1 < 1e-3, "{name}: [u] error {e1:e}");
        assert!(e2 < 1e-2, "{name}: flux error {e2:e}");
    }
}

#[test]
fn table_and_dump_formats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small("ex2-helicoid", vec![32, 64]);
    let rows = run_example(&cfg).unwrap();
    let csv = dir.path().join("t.csv");
    emit_table(&rows, &csv).unwrap();
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], TABLE_HEADER);
    assert_eq!(lines.len(), 3);
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first.len(), 6);
    assert_eq!(first[0], "32");
    assert_eq!(first[5], "");
    let second: Vec<&str> = lines[2].split(',').collect();
    let order: f64 = second[5].parse().unwrap();
    assert!((order - rows[1].observed_order.unwrap()).abs() < 1e-4);

    let out = run_single(&cfg, 32).unwrap();
    let dump = dir.path().join("u.txt");
    dump_field(&out.solution.u, &dump).unwrap();
    let text = std::fs::read_to_string(&dump).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# kfbi grid field");
    assert_eq!(lines[1], "n 32");
    assert_eq!(lines[3], "periodic false false");
    assert_eq!(lines[4], "shape 33 33");
    assert_eq!(lines.len(), 5 + 33);
    let row: Vec<f64> = lines[5 + 16]
        .split(' ')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(row.len(), 33);
    assert_eq!(row[16], out.solution.u.values[16 * 33 + 16]);
}
