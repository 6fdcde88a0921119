//! Batch CLI driving the lowering pipeline: block-map compilation with
//! certificates, reachability queries, planar flow experiments and
//! truncated curl-eigenfield extensions.

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tmflow::beltrami;
use tmflow::cantor::{self, check_area_preserving, check_disjoint_images};
use tmflow::dynamics::{self, Reach};
use tmflow::gshift;
use tmflow::machine::{parse_machine, Configuration, RunStatus, Tape, TuringMachine};
use tmflow::planar::{self, FlowInput, FlowParams, PlanarEncoding};
use tmflow::svg::SvgCanvas;

#[derive(Parser)]
#[command(name = "tmflow", version, about = "Compile Turing machines into conjugate dynamical systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutDir {
    /// Directory for report and data files.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Lower a machine to its block map and certify the lowering.
    Compile {
        /// Machine description file.
        #[arg(long, conflicts_with = "example_shift", required_unless_present = "example_shift")]
        machine: Option<PathBuf>,
        /// Use the built-in two-cell demo shift instead of a machine.
        #[arg(long)]
        example_shift: bool,
        /// Random configurations for the conjugacy summary.
        #[arg(long, default_value_t = 50)]
        configs: u32,
        /// Iterations per configuration.
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutDir,
    },
    /// Bounded reachability of the halt coding set on the block map.
    Reach {
        #[arg(long)]
        machine: PathBuf,
        /// Input tape as signed position:bit pairs, e.g. "0:1,-2:1".
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        input: String,
        /// Step bound.
        #[arg(long, default_value_t = 500)]
        steps: usize,
        #[command(flatten)]
        out: OutDir,
    },
    /// Integrate the planar gradient flow and check visit-order fidelity.
    Flow {
        #[arg(long)]
        machine: PathBuf,
        /// Input tapes (repeatable), each as signed position:bit pairs.
        #[arg(long, allow_hyphen_values = true)]
        input: Vec<String>,
        /// Height budget (machine steps tracked).
        #[arg(long, default_value_t = 30)]
        height: u32,
        /// Perturbation amplitude.
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        /// Perturbation seeds (repeatable); required when delta > 0.
        #[arg(long)]
        seed: Vec<u64>,
        /// Thickening of the coding rectangles, as a rational p/q.
        #[arg(long, default_value = "1/10")]
        epsilon: String,
        /// Normal contraction rate of the tube field.
        #[arg(long, default_value_t = 10.0)]
        contraction: f64,
        /// Tube radius; defaults to a quarter of the curve gap.
        #[arg(long)]
        tube: Option<f64>,
        /// Band index of the first input.
        #[arg(long, default_value_t = 0)]
        band_base: u32,
        /// Worker threads for trajectory integration.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        out: OutDir,
    },
    /// Extend planar gradient data to a truncated field with curl u = lambda u.
    Beltrami {
        /// Potential F(x,y), e.g. "x^3 - 3*x*y^2".
        #[arg(long, conflicts_with_all = ["vx", "vy"], allow_hyphen_values = true)]
        potential: Option<String>,
        /// Datum components given directly (checked for compatibility).
        #[arg(long, requires = "vy", allow_hyphen_values = true)]
        vx: Option<String>,
        #[arg(long, requires = "vx", allow_hyphen_values = true)]
        vy: Option<String>,
        /// Eigenvalue lambda as a rational p/q.
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        lambda: String,
        /// Truncation order.
        #[arg(long, default_value_t = 20)]
        order: usize,
        /// Height of the evaluation grid slice.
        #[arg(long, default_value_t = 0.5)]
        eval_z: f64,
        #[command(flatten)]
        out: OutDir,
    },
}

/// Input error (exit 2) or property-check failure (exit 3).
enum CmdError {
    Input(String),
    PropertyFailure(String),
}

impl<E: std::error::Error> From<E> for CmdError {
    fn from(e: E) -> Self {
        CmdError::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CmdError::PropertyFailure(msg)) => {
            eprintln!("property check failed: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cmd: Command) -> Result<(), CmdError> {
    match cmd {
        Command::Compile {
            machine,
            example_shift,
            configs,
            steps,
            seed,
            out,
        } => cmd_compile(machine.as_deref(), example_shift, configs, steps, seed, &out.out_dir),
        Command::Reach {
            machine,
            input,
            steps,
            out,
        } => cmd_reach(&machine, &input, steps, &out.out_dir),
        Command::Flow {
            machine,
            input,
            height,
            delta,
            seed,
            epsilon,
            contraction,
            tube,
            band_base,
            jobs,
            out,
        } => cmd_flow(
            &machine, &input, height, delta, &seed, &epsilon, contraction, tube, band_base, jobs,
            &out.out_dir,
        ),
        Command::Beltrami {
            potential,
            vx,
            vy,
            lambda,
            order,
            eval_z,
            out,
        } => cmd_beltrami(
            potential.as_deref(),
            vx.as_deref(),
            vy.as_deref(),
            &lambda,
            order,
            eval_z,
            &out.out_dir,
        ),
    }
}

fn load_machine(path: &Path) -> Result<TuringMachine, CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CmdError::Input(format!("{}: {e}", path.display())))?;
    parse_machine(&text).map_err(|e| CmdError::Input(format!("{}: {e}", path.display())))
}

fn parse_tape(spec: &str) -> Result<Tape, CmdError> {
    tmflow::machine::parse_tape_spec(spec).map_err(|e| CmdError::Input(e.to_string()))
}

fn parse_ratio(text: &str) -> Result<BigRational, CmdError> {
    beltrami::parse_rational(text).map_err(|e| CmdError::Input(e.to_string()))
}

/// Writes through a temp file so readers never see partial output.
fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<(), CmdError> {
    std::fs::create_dir_all(dir).map_err(|e| CmdError::Input(format!("{}: {e}", dir.display())))?;
    let tmp = dir.join(format!(".{name}.tmp"));
    let path = dir.join(name);
    std::fs::write(&tmp, contents).map_err(|e| CmdError::Input(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, &path)
        .map_err(|e| CmdError::Input(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn random_configuration(rng: &mut ChaCha8Rng, states: u32, radius: i64) -> Configuration {
    let mut tape = Tape::blank();
    for _ in 0..rng.random_range(0..8) {
        tape.set(rng.random_range(-radius..=radius), 1);
    }
    Configuration::new(rng.random_range(1..=states), tape)
}

fn blockmap_svg(bm: &cantor::BlockMap) -> String {
    let mut canvas = SvgCanvas::new(640.0, 320.0);
    let draw_square = |canvas: &mut SvgCanvas, x0: f64, label: &str| {
        canvas.rect(x0, 10.0, 280.0, 280.0, "fill:none;stroke:#333;stroke-width:1", "frame");
        canvas.text(x0 + 120.0, 306.0, 12.0, label);
    };
    draw_square(&mut canvas, 20.0, "sources");
    draw_square(&mut canvas, 340.0, "images");
    let colors = ["#7eb26d", "#eab839", "#6ed0e0", "#ef843c", "#e24d42", "#1f78c1"];
    for (i, comp) in bm.components().iter().enumerate() {
        let color = colors[i % colors.len()];
        for (x0, block) in [(20.0, &comp.source), (340.0, &comp.image)] {
            let [xl, xh, yl, yh] = block.footprint();
            let (xl, xh) = (xl.to_f64().unwrap(), xh.to_f64().unwrap());
            let (yl, yh) = (yl.to_f64().unwrap(), yh.to_f64().unwrap());
            canvas.rect(
                x0 + 280.0 * xl,
                10.0 + 280.0 * (1.0 - yh),
                280.0 * (xh - xl),
                280.0 * (yh - yl),
                &format!("fill:{color};fill-opacity:0.45;stroke:{color}"),
                "block",
            );
        }
    }
    canvas.finish()
}

fn cmd_compile(
    machine: Option<&Path>,
    example_shift: bool,
    configs: u32,
    steps: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<(), CmdError> {
    let mut report = String::new();
    let (bm, conjugacy_ok) = if example_shift {
        let gs = gshift::example_shift();
        let bm = cantor::gshift_to_blockmap(&gs)?;
        // commutation of the square: encode then map against shift then encode
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ok = true;
        for _ in 0..configs {
            let mut s = gshift::SymbolSequence::blank(2);
            for _ in 0..rng.random_range(0..10) {
                s.set(rng.random_range(-8..8), 1);
            }
            for _ in 0..steps {
                let lhs = bm.apply(&cantor::encode_sequence(&s))?;
                let next = gs.apply(&s);
                ok &= lhs == cantor::encode_sequence(&next);
                s = next;
            }
        }
        let _ = writeln!(report, "# compile report: built-in example shift");
        (bm, ok)
    } else {
        let tm = load_machine(machine.expect("clap enforces the machine argument"))?;
        let compiled = cantor::compile_machine(&tm)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ok = true;
        for _ in 0..configs {
            let c = random_configuration(&mut rng, tm.state_count(), 10);
            let run = tm.run(&c, steps);
            let mut p = compiled.encode_configuration(&c);
            for k in 1..=steps {
                p = compiled.block_map.apply(&p)?;
                let expect = match &run.status {
                    RunStatus::Halted { step, .. } if k >= *step => &run.trace[*step],
                    _ => &run.trace[k],
                };
                ok &= compiled.decode_ternary(&p).ok().as_ref() == Some(expect);
            }
        }
        let _ = writeln!(
            report,
            "# compile report: machine with {} states (reversible={})",
            tm.state_count(),
            tm.is_reversible()
        );
        let disjoint = check_disjoint_images(&compiled.encodable_block_map());
        let _ = writeln!(
            report,
            "bijective_on_reachable_windows: {}{}",
            disjoint.disjoint,
            disjoint
                .witness
                .map(|(i, j)| format!(" (overlapping image pair: components {i}, {j})"))
                .unwrap_or_default()
        );
        (compiled.block_map, ok)
    };
    let _ = writeln!(report, "# seed={seed} configs={configs} steps={steps}");
    let area = check_area_preserving(&bm);
    let disjoint = check_disjoint_images(&bm);
    let _ = writeln!(report, "components: {}", bm.components().len());
    let _ = writeln!(report, "area_preserving: {}", area.passes());
    let _ = writeln!(
        report,
        "source_measure: {} image_measure: {}",
        area.total_source_measure, area.total_image_measure
    );
    let _ = writeln!(
        report,
        "images_pairwise_disjoint: {}{}",
        disjoint.disjoint,
        disjoint
            .witness
            .map(|(i, j)| format!(" (witness: components {i}, {j})"))
            .unwrap_or_default()
    );
    let _ = writeln!(report, "conjugacy_summary: {}", if conjugacy_ok { "PASS" } else { "FAIL" });
    write_atomic(out_dir, "blockmap.txt", &bm.render_report())?;
    write_atomic(out_dir, "certificates.txt", &report)?;
    write_atomic(out_dir, "blockmap.svg", &blockmap_svg(&bm))?;
    print!("{report}");
    if !conjugacy_ok || !area.passes() {
        return Err(CmdError::PropertyFailure(
            "conjugacy or area certificate failed".into(),
        ));
    }
    Ok(())
}

fn cmd_reach(machine: &Path, input: &str, steps: usize, out_dir: &Path) -> Result<(), CmdError> {
    let tm = load_machine(machine)?;
    let tape = parse_tape(input)?;
    let c = tm.start_configuration(tape);
    let eq = dynamics::halting_equivalence(&tm, &c, steps)?;
    let compiled = cantor::compile_machine(&tm)?;
    let start = compiled.encode_configuration(&c);
    let target = dynamics::HaltingSet::for_machine(&tm, &compiled.bit_coding);
    let outcome = dynamics::reach(&compiled.block_map, &start, &target, steps)?;
    let mut report = String::new();
    let _ = writeln!(report, "# reach report: bound={steps} input=\"{input}\"");
    let _ = writeln!(
        report,
        "orbit: {}",
        match outcome {
            Reach::Reached(n) => format!("Reached({n})"),
            Reach::NotWithin(n) => format!("NotWithin({n})"),
        }
    );
    let _ = writeln!(
        report,
        "machine: {}",
        eq.machine_halts_at
            .map(|n| format!("halts at step {n}"))
            .unwrap_or_else(|| "running".into())
    );
    let _ = writeln!(report, "agreement: {}", eq.agree());
    write_atomic(out_dir, "reach.txt", &report)?;
    write_atomic(out_dir, "trace.csv", &dynamics::trace_csv(&tm, &c, steps))?;
    print!("{report}");
    if !eq.agree() {
        return Err(CmdError::PropertyFailure(
            "orbit reachability disagrees with direct simulation".into(),
        ));
    }
    Ok(())
}

fn flow_svg(
    report: &planar::FlowReport,
    potential_curves: &[planar::ComputationCurve],
    encoding: &PlanarEncoding,
    height: u32,
) -> String {
    let bands: Vec<u32> = potential_curves.iter().map(|c| c.band()).collect();
    let x_max = bands.iter().map(|&b| 2 * b + 1).max().unwrap_or(1) as f64 + 1.0;
    let (w, h) = (720.0, 480.0);
    let sx = (w - 40.0) / x_max;
    let sy = (h - 40.0) / height as f64;
    let px = |x: f64| 20.0 + sx * x;
    let py = |y: f64| h - 20.0 - sy * y;
    let mut canvas = SvgCanvas::new(w, h);
    for &b in &bands {
        canvas.rect(
            px(2.0 * b as f64),
            py(height as f64),
            sx,
            sy * height as f64,
            "fill:#f2f2f2;stroke:#999;stroke-width:0.5",
            "band",
        );
    }
    for curve in potential_curves {
        for k in 0..=height {
            let config = curve.expected_configuration(k as usize);
            let rect = encoding.u_rectangle(config.state, &config.tape, curve.band(), k);
            let class = "uset";
            let [xl, xh, yl, yh] = rect.map(|r| r.to_f64().unwrap());
            canvas.rect(
                px(xl),
                py(yh),
                sx * (xh - xl),
                sy * (yh - yl),
                "fill:#ffd54d;fill-opacity:0.7;stroke:#cc9a06;stroke-width:0.3",
                class,
            );
        }
        let pts: Vec<(f64, f64)> = (0..=200)
            .map(|i| {
                let y = height as f64 * i as f64 / 200.0;
                (px(curve.x_at(y)), py(y))
            })
            .collect();
        canvas.polyline(&pts, "stroke:#2c7fb8;stroke-width:1", "curve");
    }
    for traj in &report.baseline_trajectories {
        let pts: Vec<(f64, f64)> = traj.points.iter().map(|&(_, x, y)| (px(x), py(y))).collect();
        canvas.polyline(&pts, "stroke:#e34a33;stroke-width:0.7;stroke-dasharray:3 2", "trajectory");
    }
    canvas.finish()
}

#[allow(clippy::too_many_arguments)]
fn cmd_flow(
    machine: &Path,
    inputs: &[String],
    height: u32,
    delta: f64,
    seeds: &[u64],
    epsilon: &str,
    contraction: f64,
    tube: Option<f64>,
    band_base: u32,
    jobs: usize,
    out_dir: &Path,
) -> Result<(), CmdError> {
    if inputs.is_empty() {
        return Err(CmdError::Input("at least one --input is required".into()));
    }
    if delta > 0.0 && seeds.is_empty() {
        return Err(CmdError::Input(
            "perturbed runs need at least one --seed".into(),
        ));
    }
    let tm = load_machine(machine)?;
    let flow_inputs: Vec<FlowInput> = inputs
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            Ok(FlowInput {
                band: band_base + i as u32,
                config: tm.start_configuration(parse_tape(spec)?),
            })
        })
        .collect::<Result<_, CmdError>>()?;
    let encoding = PlanarEncoding::new(parse_ratio(epsilon)?);
    let params = FlowParams {
        encoding: encoding.clone(),
        contraction,
        r_tube: tube,
        tolerance: 1e-9,
        jobs,
    };
    let report = planar::halting_flow_check(&tm, &flow_inputs, height, delta, seeds, &params)
        .map_err(|e| CmdError::Input(e.to_string()))?;
    // curves are rebuilt here only for rendering
    let curves: Vec<planar::ComputationCurve> = flow_inputs
        .iter()
        .map(|inp| planar::build_curve(&tm, &inp.config, inp.band, height as usize))
        .collect();
    for (inp, traj) in flow_inputs.iter().zip(&report.baseline_trajectories) {
        write_atomic(out_dir, &format!("traj_band{}.csv", inp.band), &traj.csv(inp.band))?;
    }
    write_atomic(out_dir, "flow.txt", &report.render())?;
    write_atomic(out_dir, "flow.svg", &flow_svg(&report, &curves, &encoding, height))?;
    print!("{}", report.render());
    if !report.pass() {
        return Err(CmdError::PropertyFailure(
            "visit-order or halting equivalence failed".into(),
        ));
    }
    Ok(())
}

fn cmd_beltrami(
    potential: Option<&str>,
    vx: Option<&str>,
    vy: Option<&str>,
    lambda: &str,
    order: usize,
    eval_z: f64,
    out_dir: &Path,
) -> Result<(), CmdError> {
    let lambda = parse_ratio(lambda)?;
    let f = match (potential, vx, vy) {
        (Some(p), _, _) => beltrami::parse_poly(p)?,
        (None, Some(vx), Some(vy)) => {
            let v1 = beltrami::parse_poly(vx)?;
            let v2 = beltrami::parse_poly(vy)?;
            beltrami::check_compatibility(&v1, &v2)
                .map_err(|e| CmdError::Input(e.to_string()))?
        }
        _ => {
            return Err(CmdError::Input(
                "provide --potential or both --vx and --vy".into(),
            ))
        }
    };
    let datum = beltrami::CauchyDatum::new(f, lambda).map_err(|e| CmdError::Input(e.to_string()))?;
    let series = beltrami::extend(&datum, order).map_err(|e| CmdError::Input(e.to_string()))?;
    let residual = beltrami::residual(&series, &datum);
    let mut cert = String::new();
    let _ = writeln!(cert, "# residual certificate: order={order} lambda={}", datum.lambda());
    let _ = writeln!(
        cert,
        "identities_hold_through: {}",
        residual
            .identities_hold_through()
            .map(|k| k.to_string())
            .unwrap_or_else(|| "none".into())
    );
    let _ = writeln!(cert, "datum_matches: {}", residual.datum_mismatch.0.is_zero() && residual.datum_mismatch.1.is_zero());
    let _ = writeln!(cert, "tangent_at_plane: {}", residual.tangency.is_zero());
    let pass = residual.passes(order - 1);
    let _ = writeln!(cert, "certificate: {}", if pass { "PASS" } else { "FAIL" });
    write_atomic(out_dir, "series.txt", &series.render_dump())?;
    write_atomic(out_dir, "residual.txt", &cert)?;
    write_atomic(
        out_dir,
        "grid.csv",
        &beltrami::evaluation_grid_csv(&series, 1.0, 21, eval_z),
    )?;
    print!("{cert}");
    if !pass {
        return Err(CmdError::PropertyFailure(
            "residual identities failed before the truncation order".into(),
        ));
    }
    Ok(())
}
