//! `stabcert` — stabilizer subspace certification from the command line.
//!
//! Subcommands: `gme` (entanglement certificates), `bounds` (classical and
//! quantum values), `robustness` (extractability certificate and curve),
//! `face` (affine dimension of the maximally violating behaviours).
//!
//! Exit codes: 0 success, 1 usage/input error, 2 inconclusive certificate,
//! 3 numerical non-convergence.

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use sha2::{Digest, Sha256};

use stabcert::bell::{self, BellExpression};
use stabcert::bounds;
use stabcert::geometry;
use stabcert::robustness;
use stabcert::stabilizer::{self, Code};
use stabcert::Error;

mod manifest;
mod render;

use manifest::RunManifest;
use render::fmt12;

#[derive(Parser)]
#[command(
    name = "stabcert",
    version,
    about = "Stabilizer-code Bell certificates: entanglement, bounds, robustness, face geometry"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads (default: all cores). Results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// RNG seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Emit a JSON document on stdout instead of tables.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Args)]
struct CodeArg {
    /// five_qubit | toric:L | path to a {n, generators, labelers} JSON file
    #[arg(value_name = "CODE")]
    code: String,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the code space as genuinely multipartite entangled.
    Gme(GmeArgs),
    /// Classical and quantum bounds of the code's Bell expression.
    Bounds(BoundsArgs),
    /// Extractability certificate and curve for the five-qubit inequality.
    Robustness(RobustnessArgs),
    /// Affine dimension of the maximally violating correlation face.
    Face(FaceArgs),
}

#[derive(Args)]
struct GmeArgs {
    #[command(flatten)]
    code: CodeArg,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    code: CodeArg,
    /// Skip the 4^N strategy enumeration (needed beyond 12 parties).
    #[arg(long)]
    quantum_only: bool,
    /// Special party for the substitution (default: 0).
    #[arg(long, default_value_t = 0)]
    special_party: usize,
    /// Iterative eigensolver tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct RobustnessArgs {
    /// Code (default five_qubit; toric robustness is experimental).
    #[arg(value_name = "CODE", default_value = "five_qubit")]
    code: String,
    /// Fix the slope instead of searching for the smallest tight one.
    #[arg(long)]
    a: Option<f64>,
    /// Slope lattice pace for the search.
    #[arg(long, default_value_t = 1e-3)]
    a_pace: f64,
    /// Largest slope considered by the search.
    #[arg(long, default_value_t = 1.0)]
    a_max: f64,
    /// Coarse grid points per angle on [0, π/2].
    #[arg(long, default_value_t = 9)]
    grid_points: usize,
    /// Rows in the emitted curve (β_c and β_q included).
    #[arg(long, default_value_t = 41)]
    rows: usize,
    /// Write the curve as CSV to this path.
    #[arg(long, value_name = "out.csv")]
    csv: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct FaceArgs {
    #[command(flatten)]
    code: CodeArg,
    /// Special party for the substituted observables (default: 0).
    #[arg(long, default_value_t = 0)]
    special_party: usize,
    /// Singular-value threshold for the rank decision.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Dump the correlation vectors as CSV to this path.
    #[arg(long, value_name = "out.csv")]
    csv: Option<std::path::PathBuf>,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap help/version go to stdout with success
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let started = Instant::now();
    let outcome = match &cli.command {
        Command::Gme(args) => cmd_gme(&cli, args),
        Command::Bounds(args) => cmd_bounds(&cli, args),
        Command::Robustness(args) => cmd_robustness(&cli, args),
        Command::Face(args) => cmd_face(&cli, args),
    };
    match outcome {
        Ok(Outcome {
            result,
            mut manifest,
            exit,
        }) => {
            manifest.wall_time_s = started.elapsed().as_secs_f64();
            if cli.json {
                let doc = json!({ "result": result, "manifest": manifest });
                println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
            }
            eprintln!(
                "manifest: {}",
                serde_json::to_string(&manifest).expect("manifest json")
            );
            ExitCode::from(exit)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::NonConvergence { .. } => 3,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

struct Outcome {
    result: serde_json::Value,
    manifest: RunManifest,
    exit: u8,
}

fn hash_json(value: &serde_json::Value) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(value).expect("serialize"));
    hex(&h.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn write_csv(path: &std::path::Path, content: &str) -> Result<String, Error> {
    std::fs::write(path, content)?;
    let mut h = Sha256::new();
    h.update(content.as_bytes());
    Ok(hex(&h.finalize()))
}

fn cmd_gme(cli: &Cli, args: &GmeArgs) -> Result<Outcome, Error> {
    let code = stabilizer::resolve_code(&args.code.code)?;
    let n = code.group.n_qubits();

    // toric codes get the constructive witness; everything else (and toric
    // small enough) the exhaustive pair search — both when feasible
    let exhaustive = if n <= stabilizer::EXHAUSTIVE_PARTY_CAP {
        Some(stabilizer::gme_certificate_exhaustive(&code.group)?)
    } else {
        None
    };
    let constructive = match &code.lattice {
        Some(lat) => Some(stabilizer::toric_gme_certificate(lat.l())?),
        None => None,
    };
    let cert = constructive
        .as_ref()
        .or(exhaustive.as_ref())
        .ok_or(Error::EnumerationCapExceeded {
            n,
            cap: stabilizer::EXHAUSTIVE_PARTY_CAP,
        })?;

    let agree = match (&exhaustive, &constructive) {
        (Some(a), Some(b)) => Some(
            a.witnesses
                .iter()
                .zip(&b.witnesses)
                .all(|(x, y)| x.pair.is_some() == y.pair.is_some()),
        ),
        _ => None,
    };

    let witnessed = cert.n_witnessed();
    let total = cert.n_bipartitions();
    let verdict = if cert.all_witnessed() {
        "genuinely_entangled"
    } else {
        "inconclusive"
    };

    if !cli.json {
        println!("code: {}  (n = {n})", code.name);
        println!("bipartitions witnessed: {witnessed}/{total}");
        if let Some(agree) = agree {
            println!(
                "constructive/exhaustive agreement: {}",
                if agree { "yes" } else { "NO" }
            );
        }
        println!("verdict: {verdict}");
    }

    let witnesses_json = if n <= 10 {
        Some(
            cert.witnesses
                .iter()
                .map(|w| {
                    json!({
                        "side_mask": w.side_mask,
                        "pair": w.pair.map(|(i, j)| vec![i, j]),
                    })
                })
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };
    let result = json!({
        "code": code.name,
        "n_qubits": n,
        "n_bipartitions": total,
        "n_witnessed": witnessed,
        "verdict": verdict,
        "method": if constructive.is_some() { "constructive" } else { "exhaustive" },
        "cross_agreement": agree,
        "witnesses": witnesses_json,
    });
    let manifest = RunManifest::new(
        "gme",
        json!({ "code": args.code.code }),
        cli.seed,
        hash_json(&result),
    );
    let exit = if cert.all_witnessed() { 0 } else { 2 };
    Ok(Outcome {
        result,
        manifest,
        exit,
    })
}

/// The Bell expression attached to a code: the built-in weighted form for
/// the five-qubit code, all-ones weights otherwise.
fn expression_for(code: &Code, special_party: usize) -> Result<BellExpression, Error> {
    if code.name == "five_qubit" && special_party == 0 {
        return Ok(bell::i5());
    }
    if let Some(lat) = &code.lattice {
        return bell::i_tor(lat.l(), special_party);
    }
    let weighted: Vec<(f64, stabcert::pauli::PauliString)> = code
        .group
        .generators()
        .iter()
        .map(|g| (1.0, *g))
        .collect();
    BellExpression::from_weighted_generators(
        code.group.n_qubits(),
        &weighted,
        special_party,
        None,
    )
}

fn cmd_bounds(cli: &Cli, args: &BoundsArgs) -> Result<Outcome, Error> {
    let code = stabilizer::resolve_code(&args.code.code)?;
    let expr = expression_for(&code, args.special_party)?;

    let classical = if args.quantum_only {
        None
    } else {
        Some(bounds::classical_bound(&expr)?)
    };
    let quantum = bounds::quantum_value_ideal_opts(&expr, &code.group, cli.seed, args.tol, 5000)?;

    if !cli.json {
        println!("code: {}  expression terms: {}", code.name, expr.n_terms());
        if let Some(c) = &classical {
            println!("classical bound (enumeration): {}", fmt12(c.value));
        }
        if let Some(hint) = expr.classical_bound_hint {
            println!("classical bound (formula):     {}", fmt12(hint));
        }
        println!(
            "quantum value ({}): {}",
            match quantum.method {
                bounds::BoundMethod::DenseEig => "dense eig",
                bounds::BoundMethod::IterativeEig => "iterative eig",
                bounds::BoundMethod::Enumeration => "enumeration",
            },
            fmt12(quantum.value)
        );
        println!("eigen residual: {}", fmt12(quantum.residual));
    }

    let result = json!({
        "code": code.name,
        "n_parties": expr.n_parties,
        "n_terms": expr.n_terms(),
        "classical": classical.as_ref().map(|c| json!({
            "value": c.value,
            "method": c.method,
            "argmax_strategy": c.argmax_strategy.as_ref().map(|s| s.signs.clone()),
        })),
        "classical_hint": expr.classical_bound_hint,
        "quantum": {
            "value": quantum.value,
            "method": quantum.method,
            "residual": quantum.residual,
            "matvecs": quantum.matvecs,
        },
    });
    let manifest = RunManifest::new(
        "bounds",
        json!({
            "code": args.code.code,
            "quantum_only": args.quantum_only,
            "special_party": args.special_party,
            "tol": args.tol,
        }),
        cli.seed,
        hash_json(&result),
    );
    Ok(Outcome {
        result,
        manifest,
        exit: 0,
    })
}

fn cmd_robustness(cli: &Cli, args: &RobustnessArgs) -> Result<Outcome, Error> {
    let code = stabilizer::resolve_code(&args.code)?;
    if code.name != "five_qubit" && !cli.json {
        eprintln!("note: robustness beyond the five-qubit code is experimental");
    }
    let expr = expression_for(&code, 0)?;
    let setup = robustness::RobustnessSetup::new(expr, &code.group)?;
    let grid = robustness::GridSpec {
        points_per_angle: args.grid_points,
        ..robustness::GridSpec::default()
    };

    let (certificate, floor) = match args.a {
        Some(a) => {
            let cert = robustness::b_of_a(&setup, a, &grid)?;
            (cert, None)
        }
        None => {
            let scan = robustness::ScanSpec {
                pace: args.a_pace,
                a_max: args.a_max,
            };
            let cert = robustness::certificate_search(&setup, &scan, &grid)?;
            let floor = robustness::product_state_overlap_floor(
                &setup.projector,
                setup.n_parties(),
                100,
                cli.seed,
            );
            (cert, Some(floor))
        }
    };
    let rows = robustness::curve_rows(&setup, &certificate, args.rows);

    let mut csv = String::from("relative_violation,absolute_violation,lower_bound\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt12(r.relative_violation),
            fmt12(r.absolute_violation),
            fmt12(r.lower_bound)
        ));
    }
    let csv_hash = match &args.csv {
        Some(path) => Some(write_csv(path, &csv)?),
        None => None,
    };

    if !cli.json {
        println!("code: {}", code.name);
        println!(
            "certificate: a = {}  b = {}",
            fmt12(certificate.a),
            fmt12(certificate.b)
        );
        println!(
            "a·β_q + b = {}   (β_c = {}, β_q = {})",
            fmt12(certificate.bound_at_max_violation),
            fmt12(setup.beta_c),
            fmt12(setup.beta_q)
        );
        if let Some(f) = floor {
            println!("trivial product-state floor: {}", fmt12(f));
        }
        if args.csv.is_none() {
            println!("relative_violation  absolute_violation  lower_bound");
            for r in &rows {
                println!(
                    "{}  {}  {}",
                    fmt12(r.relative_violation),
                    fmt12(r.absolute_violation),
                    fmt12(r.lower_bound)
                );
            }
        }
    }

    let result = json!({
        "code": code.name,
        "certificate": certificate,
        "trivial_floor": floor,
        "beta_c": setup.beta_c,
        "beta_q": setup.beta_q,
        "rows": rows,
    });
    let mut manifest = RunManifest::new(
        "robustness",
        json!({
            "code": args.code,
            "a": args.a,
            "a_pace": args.a_pace,
            "a_max": args.a_max,
            "grid_points": args.grid_points,
            "rows": args.rows,
        }),
        cli.seed,
        hash_json(&result),
    );
    if let Some(h) = csv_hash {
        manifest.outputs.insert("csv".into(), h);
    }
    Ok(Outcome {
        result,
        manifest,
        exit: 0,
    })
}

fn cmd_face(cli: &Cli, args: &FaceArgs) -> Result<Outcome, Error> {
    let code = stabilizer::resolve_code(&args.code.code)?;
    let n = code.group.n_qubits();
    let obs = bounds::ObservableAssignment::ideal(n, args.special_party);

    let mut loop_table: Option<Vec<geometry::LoopExpectation>> = None;
    let mut csv_dump: Option<String> = None;

    let report = if n <= geometry::FULL_CORRELATOR_PARTY_CAP {
        let basis = stabilizer::code_basis(&code.group, &code.labelers)?;
        let points: Vec<geometry::CorrelationPoint> = basis
            .states
            .iter()
            .map(|s| geometry::behaviour_of(s, &obs))
            .collect::<Result<_, _>>()?;
        if let Some(lat) = &code.lattice {
            loop_table = Some(geometry::loop_expectations(
                &points[0],
                lat.l(),
                args.special_party,
            )?);
        }
        if args.csv.is_some() {
            let mut dump = String::from("point");
            for k in 0..points[0].n_correlators() {
                dump.push_str(&format!(",c{k}"));
            }
            dump.push('\n');
            for (i, p) in points.iter().enumerate() {
                dump.push_str(&i.to_string());
                let b = p.to_behaviour();
                for (_, v) in b.iter() {
                    dump.push_str(&format!(",{}", fmt12(*v)));
                }
                dump.push('\n');
            }
            csv_dump = Some(dump);
        }
        geometry::face_dimension_with_threshold(&points, args.tol)
    } else {
        // declared sub-family: the expression's correlators plus every loop
        // correlator; the dimension is then a lower bound
        let lat = code.lattice.as_ref().ok_or(Error::EnumerationCapExceeded {
            n,
            cap: geometry::FULL_CORRELATOR_PARTY_CAP,
        })?;
        let expr = bell::i_tor(lat.l(), args.special_party)?;
        let mut keys: Vec<bell::SupportKey> = expr.terms.iter().map(|t| t.key()).collect();
        for r in 0..lat.l() as isize {
            for t in bell::substitute(&lat.z_hor_loop(r), args.special_party, 1.0)? {
                keys.push(t.key());
            }
        }
        for c in 0..lat.l() as isize {
            for t in bell::substitute(&lat.z_vert_loop(c), args.special_party, 1.0)? {
                keys.push(t.key());
            }
        }
        keys.sort_unstable();
        keys.dedup();
        let states = lat.code_states_matrix_free()?;
        let behaviours: Vec<bell::Behaviour> = states
            .iter()
            .map(|(_, s)| geometry::subfamily_correlators(s, &obs, &keys))
            .collect::<Result<_, _>>()?;
        geometry::face_dimension_on_family(&behaviours, &keys)
    };

    let csv_hash = match (&args.csv, &csv_dump) {
        (Some(path), Some(content)) => Some(write_csv(path, content)?),
        _ => None,
    };

    if !cli.json {
        println!("code: {}  (n = {n})", code.name);
        println!("face dimension: {}", report.dimension);
        let sv: Vec<String> = report.singular_values.iter().map(|s| fmt12(*s)).collect();
        println!("singular values: [{}]", sv.join(", "));
        if n > geometry::FULL_CORRELATOR_PARTY_CAP {
            println!("(computed on the expression + loop correlator sub-family: lower bound)");
        }
        if let Some(loops) = &loop_table {
            println!("loop expectations of the first basis point:");
            for l in loops {
                println!("  {:?}: {}", l.kind, fmt12(l.value));
            }
        }
    }

    let result = json!({
        "code": code.name,
        "dimension": report.dimension,
        "singular_values": report.singular_values,
        "rank_threshold": report.rank_threshold,
        "lower_bound_only": n > geometry::FULL_CORRELATOR_PARTY_CAP,
        "loop_expectations": loop_table,
    });
    let mut manifest = RunManifest::new(
        "face",
        json!({
            "code": args.code.code,
            "special_party": args.special_party,
            "tol": args.tol,
        }),
        cli.seed,
        hash_json(&result),
    );
    if let Some(h) = csv_hash {
        manifest.outputs.insert("csv".into(), h);
    }
    Ok(Outcome {
        result,
        manifest,
        exit: 0,
    })
}

