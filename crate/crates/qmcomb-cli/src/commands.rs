//! The five subcommand implementations.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use qmcomb::{
    delay_at_band_center, delay_profile, delay_spread, design_equidistant_comb, gaussian_pulse,
    glue_delta, ode_propagate, optimize_block, spectral_response, storage_metrics, tf_propagate,
    Block, Circuit, DelayProfile, Element, Error, FrequencyGrid, ObjectiveSpec, OptimMode,
    OptimResult, SearchConfig, SpectralResponse, TimeGrid, Waveform,
};

use crate::io::{self, BandSpec, GridSpec, PulseSpec};
use crate::manifest::ManifestBuilder;
use crate::{CliError, CliResult};

/// Reference operating point of the fully optimized block, used by
/// `reproduce-figures` for the delay-curve and gluing datasets. The free
/// two-coupling search is degenerate over the default box (raising the
/// middle coupling pushes the resonances out of band, so the absolute
/// ripple collapses together with the delay itself); its actual outcome is
/// recorded alongside in the summary for comparison.
const REFERENCE_FULL_K: f64 = 3.47;
const REFERENCE_FULL_G: f64 = 0.29;

fn parse_mode(s: &str) -> Result<OptimMode, String> {
    s.parse::<OptimMode>().map_err(|e| e.to_string())
}

/// Derives `<stem>.<suffix>` next to `path` (replacing its extension).
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut stem = path.with_extension("").into_os_string();
    stem.push(".");
    stem.push(suffix);
    PathBuf::from(stem)
}

/// Appends `.<suffix>` to a base path.
fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut name = base.as_os_str().to_owned();
    name.push(".");
    name.push(suffix);
    PathBuf::from(name)
}

/// Builds the symmetric analysis grid for a circuit: custom when given
/// (validated), otherwise four unit halfwidths for a single element and six
/// for composites.
fn analysis_grid(circuit: &Circuit, custom: Option<GridSpec>) -> CliResult<FrequencyGrid> {
    let (halfwidth, n) = match custom {
        Some(spec) => {
            if spec.lo != -spec.hi || !(spec.hi > 0.0) {
                return Err(CliError::Input(format!(
                    "analysis grid must be symmetric about zero (lo = -hi), got {}:{}",
                    spec.lo, spec.hi
                )));
            }
            if spec.n % 2 == 0 {
                return Err(CliError::Input(format!(
                    "analysis grid needs an odd point count so the band center is a \
                     sample, got {}",
                    spec.n
                )));
            }
            (spec.hi, spec.n)
        }
        None if circuit.elements.len() == 1 => (4.0, 4001),
        None => (6.0, 6001),
    };
    Ok(FrequencyGrid::symmetric(halfwidth, n)?)
}

/// Samples a circuit and writes the response CSV; returns the profile for
/// follow-up reporting.
fn write_response_csv(
    circuit: &Circuit,
    grid: &FrequencyGrid,
    out: &Path,
) -> CliResult<(SpectralResponse, DelayProfile)> {
    let response = spectral_response(circuit, grid)?;
    let profile = delay_profile(&response)?;
    io::write_atomic(out, &io::response_csv(&response, &profile))?;
    Ok((response, profile))
}

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Circuit description (JSON).
    #[arg(long)]
    pub circuit: PathBuf,
    /// Symmetric frequency grid lo:hi:n (default -4:4:4001 for a single
    /// element, -6:6:6001 for composites).
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<GridSpec>,
    /// Report the normalized-delay spread over this band lo:hi.
    #[arg(long, allow_hyphen_values = true)]
    pub band: Option<BandSpec>,
    /// Output CSV path (columns nu, re_S, im_S, phase_unwrapped, T, T_rel).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn analyze(args: &AnalyzeArgs) -> CliResult<()> {
    let mut manifest = ManifestBuilder::new("analyze");
    manifest.input(&args.circuit);
    let circuit = Circuit::from_json(&io::read_file(&args.circuit)?)?;
    let grid = analysis_grid(&circuit, args.grid)?;
    manifest.param(
        "grid",
        format!("{}:{}:{}", grid.nu_min(), grid.nu_max(), grid.len()),
    );
    let (_, profile) = write_response_csv(&circuit, &grid, &args.out)?;
    manifest.output(&args.out);
    if let Some(band) = args.band {
        manifest.param("band", format!("{}:{}", band.lo, band.hi));
        if profile.t_rel.is_some() {
            let spread = delay_spread(&profile, band.lo, band.hi)?;
            println!(
                "delay spread over [{}, {}]: {spread:.6e}",
                band.lo, band.hi
            );
        } else {
            println!(
                "delay spread over [{}, {}]: undefined (T(0) = 0)",
                band.lo, band.hi
            );
        }
    }
    manifest.write_for(&args.out)?;
    Ok(())
}

#[derive(Args)]
pub struct OptimizeArgs {
    /// Which couplings to vary: "partial" (k only) or "full" (k and g).
    #[arg(long, value_parser = parse_mode)]
    pub mode: OptimMode,
    /// Objective band lo:hi (symmetric; default -1:1).
    #[arg(long, allow_hyphen_values = true)]
    pub band: Option<BandSpec>,
    /// Number of objective samples across the band (odd, >= 5).
    #[arg(long, default_value_t = 41)]
    pub samples: usize,
    /// Search configuration as a JSON fragment, e.g.
    /// '{"starts": 9, "tol": 1e-5}'; omitted fields take defaults.
    #[arg(long)]
    pub search: Option<String>,
    /// Objective-evaluation budget (overrides the search fragment).
    #[arg(long)]
    pub budget: Option<usize>,
    /// Multistart jitter seed; 0 keeps starts on the coarse grid
    /// (overrides the search fragment).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output JSON path for the optimization result.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn optimize(args: &OptimizeArgs) -> CliResult<()> {
    let mut manifest = ManifestBuilder::new("optimize");
    let band_halfwidth = match args.band {
        None => 1.0,
        Some(band) => {
            if band.lo != -band.hi || !(band.hi > 0.0) {
                return Err(CliError::Input(format!(
                    "objective band must be symmetric about zero, got {}:{}",
                    band.lo, band.hi
                )));
            }
            band.hi
        }
    };
    let spec = ObjectiveSpec { band_halfwidth, n_samples: args.samples };
    let mut search: SearchConfig = match &args.search {
        None => SearchConfig::default(),
        Some(fragment) => serde_json::from_str(fragment)
            .map_err(|e| CliError::Input(format!("search fragment: {e}")))?,
    };
    if let Some(budget) = args.budget {
        search.budget = budget;
    }
    if let Some(seed) = args.seed {
        search.seed = seed;
    }
    manifest.param("mode", args.mode);
    manifest.param("band_halfwidth", band_halfwidth);
    manifest.param("n_samples", args.samples);
    manifest.param("search", io::pretty_json(&search).trim().replace('\n', " "));

    let (result, budget_exhausted) = match optimize_block(args.mode, &spec, &search) {
        Ok(result) => (result, false),
        Err(Error::BudgetExceeded { best }) => (*best, true),
        Err(err) => return Err(err.into()),
    };
    io::write_atomic(&args.out, &io::pretty_json(&result))?;
    manifest.output(&args.out);
    println!(
        "mode {}: k = {:.6}, g = {:.6}, objective = {:.6e}, spread = {:.6e}, \
         evaluations = {}, converged = {}",
        args.mode,
        result.k,
        result.g,
        result.objective_value,
        result.spread_in_band,
        result.n_evaluations,
        result.converged
    );
    manifest.write_for(&args.out)?;
    if budget_exhausted {
        return Err(CliError::Budget(format!(
            "evaluation budget {} exhausted; best point so far written to {} \
             with \"converged\": false",
            search.budget,
            args.out.display()
        )));
    }
    Ok(())
}

/// Equidistant-comb design record written by `glue --comb`.
#[derive(Debug, Serialize)]
struct CombDesign {
    k: f64,
    detunings: Vec<f64>,
    spread_in_band: f64,
}

#[derive(Args)]
pub struct GlueArgs {
    /// Circuit file holding exactly one block centered at zero.
    #[arg(long, conflicts_with_all = ["k", "g", "comb"])]
    pub circuit: Option<PathBuf>,
    /// Waveguide coupling of the block to glue.
    #[arg(long, requires = "g", conflicts_with = "comb")]
    pub k: Option<f64>,
    /// Middle coupling of the block to glue.
    #[arg(long, requires = "k", conflicts_with = "comb")]
    pub g: Option<f64>,
    /// Design the n-tooth equidistant comb baseline instead of gluing.
    #[arg(long)]
    pub comb: Option<usize>,
    /// Working band lo:hi of one block (symmetric; default -1:1). The
    /// composite is evaluated over three band widths.
    #[arg(long, allow_hyphen_values = true)]
    pub band: Option<BandSpec>,
    /// Output JSON path; the companion circuit file lands next to it as
    /// `<stem>.circuit.json`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn glue(args: &GlueArgs) -> CliResult<()> {
    let mut manifest = ManifestBuilder::new("glue");
    let band_halfwidth = match args.band {
        None => 1.0,
        Some(band) => {
            if band.lo != -band.hi || !(band.hi > 0.0) {
                return Err(CliError::Input(format!(
                    "working band must be symmetric about zero, got {}:{}",
                    band.lo, band.hi
                )));
            }
            band.hi
        }
    };
    manifest.param("band_halfwidth", band_halfwidth);
    let circuit_out = sibling(&args.out, "circuit.json");

    if let Some(n) = args.comb {
        manifest.param("comb", n);
        let (comb, k) = design_equidistant_comb(n)?;
        let circuit = Circuit::new(vec![Element::Comb(comb.clone())]);
        let grid = FrequencyGrid::symmetric((3.0 * band_halfwidth + 3.0).max(6.0), 6001)?;
        let profile = delay_profile(&spectral_response(&circuit, &grid)?)?;
        let spread =
            delay_spread(&profile, -3.0 * band_halfwidth, 3.0 * band_halfwidth)?;
        let design = CombDesign { k, detunings: comb.detunings, spread_in_band: spread };
        io::write_atomic(&args.out, &io::pretty_json(&design))?;
        manifest.output(&args.out);
        io::write_atomic(&circuit_out, &circuit.to_json())?;
        manifest.output(&circuit_out);
        println!(
            "{n}-tooth comb: k = {k:.6}, spread over [{}, {}] = {spread:.6e}",
            -3.0 * band_halfwidth,
            3.0 * band_halfwidth
        );
        manifest.write_for(&args.out)?;
        return Ok(());
    }

    let block = match (&args.circuit, args.k, args.g) {
        (Some(path), None, None) => {
            manifest.input(path);
            let circuit = Circuit::from_json(&io::read_file(path)?)?;
            match circuit.elements.as_slice() {
                [Element::Block(block)] if block.center == 0.0 => *block,
                [Element::Block(block)] => {
                    return Err(CliError::Input(format!(
                        "gluing expects a block centered at zero, got center = {}",
                        block.center
                    )))
                }
                _ => {
                    return Err(CliError::Input(
                        "gluing expects a circuit holding exactly one block".into(),
                    ))
                }
            }
        }
        (None, Some(k), Some(g)) => Block::centered(k, g),
        _ => {
            return Err(CliError::Input(
                "provide a block via --circuit, via --k and --g, or request a comb \
                 baseline via --comb"
                    .into(),
            ))
        }
    };
    manifest.param("k", block.k);
    manifest.param("g", block.g);

    let glued = glue_delta(&block, band_halfwidth)?;
    io::write_atomic(&args.out, &io::pretty_json(&glued))?;
    manifest.output(&args.out);
    io::write_atomic(&circuit_out, &glued.composite.to_json())?;
    manifest.output(&circuit_out);
    println!(
        "gluing shift = {:.6}, composite spread over [{}, {}] = {:.6e}",
        glued.delta_shift,
        -3.0 * band_halfwidth,
        3.0 * band_halfwidth,
        glued.spread_in_band
    );
    manifest.write_for(&args.out)?;
    Ok(())
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Circuit description (JSON).
    #[arg(long)]
    pub circuit: PathBuf,
    /// Integration step.
    #[arg(long, default_value_t = 0.005)]
    pub dt: f64,
    /// Gaussian pulse, e.g. sigma=2,center=12,detuning=0. Center defaults
    /// to six widths after the window start.
    #[arg(long, default_value = "")]
    pub pulse: PulseSpec,
    /// Base output path; writes <base>.ode.csv, <base>.tf.csv,
    /// <base>.metrics.json.
    #[arg(long)]
    pub out: PathBuf,
}

fn relative_l2(a: &Waveform, b: &Waveform) -> f64 {
    let num: f64 = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    let den: f64 = b.samples.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let mut manifest = ManifestBuilder::new("simulate");
    manifest.input(&args.circuit);
    let circuit = Circuit::from_json(&io::read_file(&args.circuit)?)?;
    let sigma = args.pulse.sigma.unwrap_or(2.0);
    let center = args.pulse.center.unwrap_or(6.0 * sigma);
    let detuning = args.pulse.detuning.unwrap_or(0.0);
    // Window long enough for the pulse, the circuit ring-down, and the
    // trailing tail.
    let t0: f64 = delay_at_band_center(&circuit)?;
    let t_end = center + 10.0 * t0.max(0.0) + 6.0 * sigma;
    if !(args.dt > 0.0) || !args.dt.is_finite() {
        return Err(CliError::Input(format!(
            "step must be positive and finite, got {}",
            args.dt
        )));
    }
    let n = (t_end / args.dt).ceil() as usize + 1;
    let grid = TimeGrid::new(0.0, args.dt, n)?;
    let pulse = gaussian_pulse(center, sigma, detuning, &grid)?;
    manifest.param("dt", args.dt);
    manifest.param("sigma", sigma);
    manifest.param("center", center);
    manifest.param("detuning", detuning);
    manifest.param("window_end", t_end);

    let ode = ode_propagate(&circuit, &pulse)?;
    let tf = tf_propagate(&circuit, &pulse)?;
    let metrics = storage_metrics(&pulse, &ode.output)?;
    let discrepancy = relative_l2(&ode.output, &tf);
    manifest.param("discrepancy_rel_l2", format!("{discrepancy:e}"));

    let ode_out = with_suffix(&args.out, "ode.csv");
    let tf_out = with_suffix(&args.out, "tf.csv");
    let metrics_out = with_suffix(&args.out, "metrics.json");
    io::write_atomic(&ode_out, &io::waveform_csv(&ode.output))?;
    manifest.output(&ode_out);
    io::write_atomic(&tf_out, &io::waveform_csv(&tf))?;
    manifest.output(&tf_out);
    io::write_atomic(&metrics_out, &io::pretty_json(&metrics))?;
    manifest.output(&metrics_out);
    println!(
        "efficiency = {:.9}, fidelity = {:.9}, measured delay = {:.6}, engine \
         discrepancy (relative L2) = {discrepancy:.3e}",
        metrics.efficiency, metrics.fidelity, metrics.measured_delay
    );
    manifest.write_to(&with_suffix(&args.out, "manifest.json"))?;
    Ok(())
}

/// Key numbers of a `reproduce-figures` run.
#[derive(Debug, Serialize)]
struct Summary {
    optimized_partial: OptimResult,
    optimized_full: OptimResult,
    reference_full_block: ReferencePoint,
    partial_spread_unit_band: f64,
    full_spread_unit_band: f64,
    partial_to_full_spread_ratio: f64,
    glue_delta_shift: f64,
    glued_spread_wide_band: f64,
    comb_k: f64,
    comb_spread_wide_band: f64,
    glued_flatter_than_comb: bool,
}

#[derive(Debug, Serialize)]
struct ReferencePoint {
    k: f64,
    g: f64,
}

#[derive(Args)]
pub struct ReproduceArgs {
    /// Directory for the emitted datasets (created if missing).
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Chains optimize, analyze, glue, and the comb baseline into one
/// directory of datasets.
///
/// Delay curves, the gluing plan, and the comparison numbers are computed
/// at the reference operating point of the fully coupled block (see
/// [`REFERENCE_FULL_K`]); both free optimization outcomes are recorded in
/// `summary.json` so the divergence of the two-coupling search from that
/// point stays visible.
pub fn reproduce_figures(args: &ReproduceArgs) -> CliResult<()> {
    let mut manifest = ManifestBuilder::new("reproduce-figures");
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.out_dir.display())))?;
    let path = |name: &str| args.out_dir.join(name);
    let spec = ObjectiveSpec::default();
    let search = SearchConfig::default();

    println!("optimizing single-coupling block...");
    let partial = optimize_block(OptimMode::Partial, &spec, &search)?;
    io::write_atomic(&path("optimize_partial.json"), &io::pretty_json(&partial))?;
    manifest.output(&path("optimize_partial.json"));

    println!("optimizing two-coupling block...");
    let full = optimize_block(OptimMode::Full, &spec, &search)?;
    io::write_atomic(&path("optimize_full.json"), &io::pretty_json(&full))?;
    manifest.output(&path("optimize_full.json"));

    let partial_block = Circuit::single_block(Block::centered(partial.k, 0.0));
    let full_block =
        Circuit::single_block(Block::centered(REFERENCE_FULL_K, REFERENCE_FULL_G));
    let unit_grid = FrequencyGrid::symmetric(4.0, 4001)?;

    println!("sampling block delay curves...");
    let (_, partial_profile) =
        write_response_csv(&partial_block, &unit_grid, &path("block_partial.csv"))?;
    manifest.output(&path("block_partial.csv"));
    io::write_atomic(&path("block_partial.circuit.json"), &partial_block.to_json())?;
    manifest.output(&path("block_partial.circuit.json"));
    let (_, full_profile) =
        write_response_csv(&full_block, &unit_grid, &path("block_full.csv"))?;
    manifest.output(&path("block_full.csv"));
    io::write_atomic(&path("block_full.circuit.json"), &full_block.to_json())?;
    manifest.output(&path("block_full.circuit.json"));
    let partial_spread = delay_spread(&partial_profile, -1.0, 1.0)?;
    let full_spread = delay_spread(&full_profile, -1.0, 1.0)?;

    println!("gluing the reference block pair...");
    let glued = glue_delta(&Block::centered(REFERENCE_FULL_K, REFERENCE_FULL_G), 1.0)?;
    io::write_atomic(&path("glue.json"), &io::pretty_json(&glued))?;
    manifest.output(&path("glue.json"));
    io::write_atomic(&path("composite.circuit.json"), &glued.composite.to_json())?;
    manifest.output(&path("composite.circuit.json"));
    let wide_grid = FrequencyGrid::symmetric(6.0, 6001)?;
    write_response_csv(&glued.composite, &wide_grid, &path("composite.csv"))?;
    manifest.output(&path("composite.csv"));

    println!("designing the four-tooth comb baseline...");
    let (comb, comb_k) = design_equidistant_comb(4)?;
    let comb_circuit = Circuit::new(vec![Element::Comb(comb)]);
    io::write_atomic(&path("comb4.circuit.json"), &comb_circuit.to_json())?;
    manifest.output(&path("comb4.circuit.json"));
    let (_, comb_profile) =
        write_response_csv(&comb_circuit, &wide_grid, &path("comb4.csv"))?;
    manifest.output(&path("comb4.csv"));
    let comb_spread = delay_spread(&comb_profile, -3.0, 3.0)?;

    let summary = Summary {
        optimized_partial: partial.clone(),
        optimized_full: full,
        reference_full_block: ReferencePoint { k: REFERENCE_FULL_K, g: REFERENCE_FULL_G },
        partial_spread_unit_band: partial_spread,
        full_spread_unit_band: full_spread,
        partial_to_full_spread_ratio: partial_spread / full_spread,
        glue_delta_shift: glued.delta_shift,
        glued_spread_wide_band: glued.spread_in_band,
        comb_k,
        comb_spread_wide_band: comb_spread,
        glued_flatter_than_comb: glued.spread_in_band < comb_spread,
    };
    io::write_atomic(&path("summary.json"), &io::pretty_json(&summary))?;
    manifest.output(&path("summary.json"));
    println!(
        "partial k = {:.4}, spreads {:.5} / {:.6} (ratio {:.3}); glue shift = {:.4}, \
         glued {:.5} vs comb {:.5}",
        partial.k,
        partial_spread,
        full_spread,
        partial_spread / full_spread,
        glued.delta_shift,
        glued.spread_in_band,
        comb_spread
    );
    manifest.write_to(&path("manifest.json"))?;
    Ok(())
}
