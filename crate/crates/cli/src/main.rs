mod report;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use orbitlab::distance::{
    construct_unitary_grid, delta_matrix, delta_presentation, dist_upper_bound, DistanceError,
    NormalMatrix,
};
use orbitlab::format::{parse_spec, region_text, Operator};
use orbitlab::orbits::{
    central_meet, member_strong_closure, orbit_norm_closed, same_norm_closure, same_strong_closure,
    strongstar_eq_strong, OrbitVerdict,
};
use orbitlab::selftest::{self, SelftestConfig, CRITERIA};
use orbitlab::specmeas::SpectralMeasure;
use orbitlab::{Dyadic, Rect};

use report::{error_report, Query, Report};

/// Decide orbit-closure relations and spectral distances of normal
/// operators given as operator-spec files.
#[derive(Debug, Parser)]
#[command(name = "orbitlab", version)]
struct Cli {
    /// Emit a machine-readable JSON report.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized searches and the self-test corpus.
    #[arg(long, global = true, env = "ORBITLAB_SEED", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Topology {
    Norm,
    Strongstar,
    Strong,
}

#[derive(Debug, Args)]
struct Pair {
    a: PathBuf,
    b: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Do A and B have the same closed unitary orbit?
    Compare {
        #[arg(long, value_enum)]
        topology: Topology,
        #[command(flatten)]
        files: Pair,
    },
    /// Is K in the strong closure of the unitary orbit of H?
    Member { k: PathBuf, h: PathBuf },
    /// Spectral distance (exact for matrices, a bracket for presentations).
    Delta {
        #[command(flatten)]
        files: Pair,
        /// Bracket width for presentations.
        #[arg(long, default_value = "1/256")]
        tol: Dyadic,
    },
    /// Upper bound on the distance between the unitary orbits of two matrices.
    Dist {
        #[command(flatten)]
        files: Pair,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
    },
    /// Essential spectrum.
    Essential { file: PathBuf },
    /// Is the essential spectrum (or, with --support, the spectrum) small?
    Small {
        file: PathBuf,
        /// Frame `x0 y0 x1 y1` for the complement count.
        #[arg(long, num_args = 4, allow_negative_numbers = true, value_names = ["X0", "Y0", "X1", "Y1"])]
        frame: Option<Vec<Dyadic>>,
        #[arg(long)]
        support: bool,
    },
    /// Is the unitary orbit norm-closed?
    Closedness { file: PathBuf },
    /// Build a unitary U with ‖UAU* − B‖ <= mesh by matching grid cells.
    Construct {
        #[arg(long)]
        mesh: f64,
        #[command(flatten)]
        files: Pair,
    },
    /// Scalars in the strong closure of the unitary orbit.
    CentralMeet { file: PathBuf },
    /// Run the invariant corpus.
    Selftest {
        /// Random presentation pairs per factor type.
        #[arg(long, default_value_t = 200)]
        pairs: usize,
        /// Run a single criterion.
        #[arg(long)]
        only: Option<u8>,
    },
}

type Fallible<T> = Result<T, String>;

fn load(path: &PathBuf) -> Fallible<Operator> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_spec(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn measure(path: &PathBuf) -> Fallible<SpectralMeasure> {
    match load(path)? {
        Operator::Measure(m) => Ok(m),
        Operator::Matrix { .. } => Err(format!(
            "{}: expected a spectral presentation, found a matrix",
            path.display()
        )),
    }
}

fn matrix(path: &PathBuf) -> Fallible<NormalMatrix> {
    match load(path)? {
        Operator::Matrix { matrix, .. } => Ok(matrix),
        Operator::Measure(_) => Err(format!(
            "{}: expected a matrix, found a spectral presentation",
            path.display()
        )),
    }
}

fn query(cli: &Cli) -> Query {
    let path = |p: &PathBuf| p.display().to_string();
    let mut options = BTreeMap::new();
    let (command, files) = match &cli.command {
        Command::Compare { topology, files } => {
            options.insert("topology".into(), format!("{topology:?}").to_lowercase());
            ("compare", vec![path(&files.a), path(&files.b)])
        }
        Command::Member { k, h } => ("member", vec![path(k), path(h)]),
        Command::Delta { files, tol } => {
            options.insert("tol".into(), tol.to_string());
            ("delta", vec![path(&files.a), path(&files.b)])
        }
        Command::Dist { files, restarts } => {
            options.insert("restarts".into(), restarts.to_string());
            ("dist", vec![path(&files.a), path(&files.b)])
        }
        Command::Essential { file } => ("essential", vec![path(file)]),
        Command::Small {
            file,
            frame,
            support,
        } => {
            if let Some(f) = frame {
                let f: Vec<String> = f.iter().map(|d| d.to_string()).collect();
                options.insert("frame".into(), f.join(" "));
            }
            options.insert(
                "set".into(),
                if *support { "spectrum" } else { "essential" }.into(),
            );
            ("small", vec![path(file)])
        }
        Command::Closedness { file } => ("closedness", vec![path(file)]),
        Command::Construct { mesh, files } => {
            options.insert("mesh".into(), mesh.to_string());
            ("construct", vec![path(&files.a), path(&files.b)])
        }
        Command::CentralMeet { file } => ("central-meet", vec![path(file)]),
        Command::Selftest { pairs, only } => {
            options.insert("pairs".into(), pairs.to_string());
            if let Some(id) = only {
                options.insert("only".into(), id.to_string());
            }
            ("selftest", vec![])
        }
    };
    Query {
        command: command.into(),
        files,
        options,
    }
}

fn orbit_witness(v: &OrbitVerdict) -> Option<Value> {
    v.witness.as_ref().map(|w| {
        json!({
            "kind": "open_region",
            "region": region_text(&w.region),
            "m_h": w.m_h.to_string(),
            "m_k": w.m_k.to_string(),
            "capped": w.capped,
        })
    })
}

/// Tolerance for deciding that two matrices have the same eigenvalues.
const MATRIX_EQ_TOL: f64 = 1e-9;

fn matrices_same_orbit(r: &mut Report, a: &NormalMatrix, b: &NormalMatrix) -> Fallible<()> {
    let d = delta_matrix(a, b).map_err(|e| e.to_string())?;
    let scale = 1.0f64.max(
        a.eigenvalues()
            .iter()
            .chain(b.eigenvalues())
            .map(|z| z.norm())
            .fold(0.0, f64::max),
    );
    let holds = d <= MATRIX_EQ_TOL * scale;
    r.result = json!({ "delta": d });
    r.notes.push(format!(
        "matrices: every closure of the orbit is the orbit itself; eigenvalues compared to {MATRIX_EQ_TOL:e}"
    ));
    r.decide(
        holds,
        if holds {
            "same eigenvalues with multiplicity".to_string()
        } else {
            format!("eigenvalue lists differ (spectral distance {d:.6e})")
        },
    );
    Ok(())
}

fn compare_presentations(r: &mut Report, v: OrbitVerdict, what: &str) {
    if let Some(w) = orbit_witness(&v) {
        r.witnesses.push(w);
    }
    r.notes.extend(v.notes.iter().cloned());
    r.result = json!({ "relation": v.relation });
    let summary = if v.holds {
        format!("{what}: yes")
    } else {
        format!("{what}: no (witness region attached)")
    };
    r.decide(v.holds, summary);
}

fn run(cli: &Cli, r: &mut Report) -> Fallible<()> {
    match &cli.command {
        Command::Compare { topology, files } => {
            let (a, b) = (load(&files.a)?, load(&files.b)?);
            match (a, b) {
                (Operator::Matrix { matrix: a, .. }, Operator::Matrix { matrix: b, .. }) => {
                    matrices_same_orbit(r, &a, &b)?
                }
                (Operator::Measure(h), Operator::Measure(k)) => {
                    let v = match topology {
                        Topology::Norm => same_norm_closure(&h, &k),
                        Topology::Strongstar | Topology::Strong => same_strong_closure(&h, &k),
                    }
                    .map_err(|e| e.to_string())?;
                    if !matches!(topology, Topology::Norm) {
                        r.notes.push(
                            "for normal operators the strong and strong* closures of the orbit \
                             contain the same normal operators"
                                .into(),
                        );
                    }
                    let what = match topology {
                        Topology::Norm => "same norm-closed orbit",
                        Topology::Strongstar => "same strong*-closed orbit",
                        Topology::Strong => "same strong-closed orbit",
                    };
                    compare_presentations(r, v, what);
                }
                _ => return Err("cannot compare a matrix with a spectral presentation".into()),
            }
        }
        Command::Member { k, h } => match (load(k)?, load(h)?) {
            (Operator::Matrix { matrix: k, .. }, Operator::Matrix { matrix: h, .. }) => {
                matrices_same_orbit(r, &h, &k)?
            }
            (Operator::Measure(k), Operator::Measure(h)) => {
                let v = member_strong_closure(&k, &h).map_err(|e| e.to_string())?;
                compare_presentations(r, v, "K in the strong closure of the orbit of H");
            }
            _ => return Err("cannot compare a matrix with a spectral presentation".into()),
        },
        Command::Delta { files, tol } => match (load(&files.a)?, load(&files.b)?) {
            (Operator::Matrix { matrix: a, .. }, Operator::Matrix { matrix: b, .. }) => {
                let d = delta_matrix(&a, &b).map_err(|e| e.to_string())?;
                r.result = json!({ "delta": d });
                r.computed(format!("spectral distance {d:.12e}"));
            }
            (Operator::Measure(h), Operator::Measure(k)) => {
                let b = delta_presentation(&h, &k, *tol).map_err(|e| e.to_string())?;
                r.brackets = Some(serde_json::to_value(&b).map_err(|e| e.to_string())?);
                r.result = json!({ "lo": b.lo.to_string(), "hi": b.hi.to_string() });
                r.notes.push(
                    "bracket in the sup metric; euclid_lo/euclid_hi for the Euclidean one".into(),
                );
                r.computed(format!(
                    "spectral distance in [{}, {}] (sup metric)",
                    b.lo, b.hi
                ));
            }
            _ => return Err("cannot compare a matrix with a spectral presentation".into()),
        },
        Command::Dist { files, restarts } => {
            let (a, b) = (matrix(&files.a)?, matrix(&files.b)?);
            let rep = dist_upper_bound(&a, &b, *restarts, cli.seed).map_err(|e| e.to_string())?;
            r.result = serde_json::to_value(&rep).map_err(|e| e.to_string())?;
            r.brackets = Some(json!({ "lo": 0.0, "hi": rep.dist_ub }));
            r.computed(format!(
                "orbit distance <= {:.12e} (spectral distance {:.12e})",
                rep.dist_ub, rep.delta_exact
            ));
        }
        Command::Essential { file } => {
            let m = measure(file)?;
            let ess = m.essential_spectrum();
            r.result = json!({ "essential_spectrum": ess, "text": ess.to_string() });
            r.computed(format!("essential spectrum {ess}"));
        }
        Command::Small {
            file,
            frame,
            support,
        } => {
            let m = measure(file)?;
            let set = if *support {
                m.support()
            } else {
                m.essential_spectrum()
            };
            let frame = match frame {
                Some(f) => Rect::new(f[0], f[1], f[2], f[3]),
                None => set.default_frame(),
            };
            let components = set
                .complement_components(&frame)
                .map_err(|e| e.to_string())?;
            let small = set.is_small(&frame).map_err(|e| e.to_string())?;
            r.result = json!({
                "set": set.to_string(),
                "frame": frame.to_string(),
                "interior": set.has_interior(),
                "complement_components": components,
            });
            r.decide(
                small,
                format!(
                    "{set} is {}small (interior: {}, complement components: {components})",
                    if small { "" } else { "not " },
                    set.has_interior()
                ),
            );
        }
        Command::Closedness { file } => {
            let m = measure(file)?;
            let nc = orbit_norm_closed(&m);
            for a in nc.atoms.iter().filter(|a| !a.ok) {
                r.witnesses.push(json!({
                    "kind": "deleted_neighbourhood",
                    "point": a.point.to_string(),
                    "value": a.value.to_string(),
                    "radius": a.radius.to_string(),
                    "deleted_class": a.deleted_class.to_string(),
                }));
            }
            if !nc.diagonal {
                r.notes
                    .push("not diagonal: the presentation has blocks".into());
            }
            if !nc.countable_essential_spectrum {
                r.notes.push("the essential spectrum is uncountable".into());
            }
            r.result = serde_json::to_value(&nc).map_err(|e| e.to_string())?;
            r.decide(
                nc.closed,
                if nc.closed {
                    "the unitary orbit is norm-closed"
                } else {
                    "the unitary orbit is not norm-closed"
                },
            );
        }
        Command::Construct { mesh, files } => {
            let (a, b) = (matrix(&files.a)?, matrix(&files.b)?);
            match construct_unitary_grid(&a, &b, *mesh) {
                Ok(g) => {
                    r.result = json!({
                        "achieved_norm": g.achieved_norm,
                        "mesh": g.mesh,
                        "perm": g.perm,
                    });
                    r.decide(
                        true,
                        format!("‖UAU* − B‖ = {:.6e} <= mesh {}", g.achieved_norm, g.mesh),
                    );
                }
                Err(DistanceError::MultiplicityMismatch {
                    cell,
                    h_count,
                    k_count,
                }) => {
                    let c = cell.center();
                    r.witnesses.push(json!({
                        "kind": "grid_cell",
                        "i": cell.i,
                        "j": cell.j,
                        "side": cell.side(),
                        "center": [c.re, c.im],
                        "a_count": h_count,
                        "b_count": k_count,
                    }));
                    r.decide(
                        false,
                        format!(
                            "grid cell ({}, {}) holds {h_count} vs {k_count} eigenvalues",
                            cell.i, cell.j
                        ),
                    );
                }
                Err(e) => return Err(e.to_string()),
            }
        }
        Command::CentralMeet { file } => {
            let m = measure(file)?;
            let cm = central_meet(&m);
            if cm.finite_factor {
                r.notes
                    .push("finite factor: only a scalar operator meets the center".into());
            } else if m.factor().is_sigma_finite() {
                let ss = strongstar_eq_strong(&m).map_err(|e| e.to_string())?;
                r.notes
                    .push(format!("strong*-closed orbit is strong-closed: {ss}"));
            }
            r.result = json!({ "points": cm.points, "text": cm.points.to_string(), "finite_factor": cm.finite_factor });
            r.computed(format!("scalars in the strong-closed orbit: {}", cm.points));
        }
        Command::Selftest { pairs, only } => {
            let cfg = SelftestConfig {
                seed: cli.seed,
                pairs_per_factor: *pairs,
                ..SelftestConfig::default()
            };
            let ids: Vec<u8> = match only {
                Some(id) if CRITERIA.iter().any(|c| c.0 == *id) => vec![*id],
                Some(id) => return Err(format!("no criterion {id}")),
                None => CRITERIA.iter().map(|c| c.0).collect(),
            };
            let results: Vec<_> = ids.iter().map(|id| selftest::run(*id, &cfg)).collect();
            for c in &results {
                r.notes.push(format!(
                    "[{}] {:>2} {}: {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.id,
                    c.name,
                    c.detail
                ));
            }
            let passed = results.iter().filter(|c| c.pass).count();
            r.result = serde_json::to_value(&results).map_err(|e| e.to_string())?;
            r.decide(
                passed == results.len(),
                format!("{passed}/{} criteria pass", results.len()),
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let q = query(&cli);
    let start = Instant::now();
    let mut r = Report::new(q.clone(), cli.seed);
    match run(&cli, &mut r) {
        Ok(()) => {
            r.timing_ms = start.elapsed().as_secs_f64() * 1e3;
            let text = if cli.json {
                serde_json::to_string_pretty(&r).expect("report serializes") + "\n"
            } else {
                r.render_text()
            };
            // A closed pipe downstream is not an error of the query.
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            ExitCode::from(r.exit_code as u8)
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            if cli.json {
                let text = serde_json::to_string_pretty(&error_report(q, cli.seed, &msg))
                    .expect("report serializes");
                let _ = writeln!(std::io::stdout().lock(), "{text}");
            }
            ExitCode::from(2)
        }
    }
}
