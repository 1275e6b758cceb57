//! Figure reproduction pipelines.

use std::fmt::Write;

use clap::ValueEnum;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use antibunch::correlation::{Scene, MASK_FLOOR};
use antibunch::couplings::{couplings_for, CouplingSet};
use antibunch::dynamics::{build_generator, correlators, steady_state, tomography_export, CorrelatorSet, SteadyState};
use antibunch::greens::{SphereMultipoles, Side};
use antibunch::map::{map_sweep, Payload};
use antibunch::model::{format_complex, Config, Environment, GridSpec};
use antibunch::zeros::{eps_independent_zeros, trivial_zeros, zero_locus, MinimaMask, ZeroLocus};

use crate::error::CliError;
use crate::output::{Kind, Output};
use crate::presets::Settings;
use crate::svg::{self, Marker, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig1b,
    Fig2,
    Fig3a,
    Fig3b,
    Fig4b,
    Fig4c,
    Fig4d,
    Sm2,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1b => "fig1b",
            Figure::Fig2 => "fig2",
            Figure::Fig3a => "fig3a",
            Figure::Fig3b => "fig3b",
            Figure::Fig4b => "fig4b",
            Figure::Fig4c => "fig4c",
            Figure::Fig4d => "fig4d",
            Figure::Sm2 => "sm2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum State {
    Symmetric,
    Antisymmetric,
}

impl State {
    pub fn name(self) -> &'static str {
        match self {
            State::Symmetric => "symmetric",
            State::Antisymmetric => "antisymmetric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Panel {
    A,
    B,
    C,
}

impl Panel {
    pub fn name(self) -> &'static str {
        match self {
            Panel::A => "a",
            Panel::B => "b",
            Panel::C => "c",
        }
    }
}

/// Material labels shared by the substrate and sphere figures, with their plot colours.
pub const MATERIALS: [(&str, &str); 3] = [("metal-a", "#1f77b4"), ("metal-b", "#d62728"), ("dielectric", "#2ca02c")];
const VACUUM_COLOR: &str = "#ff7f0e";

pub struct Request {
    pub figure: Figure,
    pub state: Option<State>,
    pub panel: Option<Panel>,
}

pub fn run(req: &Request, settings: &Settings, out: &mut Output) -> Result<(), CliError> {
    match req.figure {
        Figure::Fig1b => fig1b(settings, out),
        Figure::Fig2 => {
            let states = match req.state {
                Some(s) => vec![s],
                None => vec![State::Symmetric, State::Antisymmetric],
            };
            fig2(&states, settings, out)
        }
        Figure::Fig3a => fig3a(settings, out),
        Figure::Fig3b => fig3b(settings, out),
        Figure::Fig4b => fig4b(settings, out),
        Figure::Fig4c => fig4c(settings, out),
        Figure::Fig4d => fig4d(settings, out),
        Figure::Sm2 => {
            let panels = match req.panel {
                Some(p) => vec![p],
                None => vec![Panel::A, Panel::B, Panel::C],
            };
            for p in panels {
                sm2(p, settings, out)?;
            }
            Ok(())
        }
    }
}

fn epsilon_label(env: &Environment) -> String {
    match env {
        Environment::Substrate { epsilon } | Environment::Sphere { epsilon, .. } => {
            format!("ε = {}", format_complex(*epsilon))
        }
        Environment::PerfectMirror => "perfect mirror".into(),
        Environment::FreeSpace => "ε = 1".into(),
    }
}

fn scene(config: &Config, settings: &Settings) -> Result<Scene, CliError> {
    Ok(Scene::with_lmax(config.environment, config.dimer, settings.lmax)?)
}

/// Couplings and steady state for a configuration's drive.
pub fn solve(config: &Config, lmax: usize) -> Result<(CouplingSet, SteadyState), CliError> {
    let couplings = couplings_for(&config.environment, &config.dimer, lmax).map_err(|e| match e {
        antibunch::Error::Unsupported(msg) => CliError::Config(format!(
            "{msg}; correlation maps need emitter couplings, which are available for free space, the perfect mirror and the sphere"
        )),
        other => other.into(),
    })?;
    let generator = build_generator(&couplings, &config.drive)?;
    Ok((couplings, steady_state(&generator)?))
}

/// Free-space configuration with the emitters of a sphere configuration and no sphere.
pub fn vacuum_of(config: &Config) -> Config {
    Config {
        dimer: config.dimer,
        environment: Environment::FreeSpace,
        drive: config.drive,
        grid: config.grid,
    }
}

pub fn locus_csv(locus: &ZeroLocus) -> String {
    let mut s = String::from("feature,kind,closed,self_symmetric,has_partner,vertex,theta,theta_prime,residual\n");
    for (k, f) in locus.features.iter().enumerate() {
        let kind = serde_json::to_value(f.kind).unwrap();
        for (v, x) in f.vertices.iter().enumerate() {
            writeln!(
                s,
                "{k},{},{},{},{},{v},{},{},{}",
                kind.as_str().unwrap(),
                f.closed,
                f.self_symmetric,
                f.has_partner,
                x.theta,
                x.theta_p,
                x.residual
            )
            .unwrap();
        }
    }
    s
}

/// Curves (θ′ horizontal, θ vertical) and isolated points of a locus, including mirrored partners.
fn locus_graphics(locus: &ZeroLocus, label: &str, color: &str, dashed: bool) -> (Vec<Series>, Vec<Marker>) {
    let mut series = Vec::new();
    let mut markers = Vec::new();
    let mut first = true;
    for f in &locus.features {
        let mut variants = vec![f.vertices.iter().map(|v| (v.theta_p, v.theta)).collect::<Vec<_>>()];
        if f.has_partner {
            variants.push(f.vertices.iter().map(|v| (v.theta, v.theta_p)).collect());
        }
        for mut pts in variants {
            if pts.len() == 1 {
                let filled = f.kind != antibunch::zeros::FeatureKind::TrivialQuenching;
                markers.push(Marker { x: pts[0].0, y: pts[0].1, color: color.into(), filled });
                continue;
            }
            if f.closed {
                pts.push(pts[0]);
            }
            series.push(Series {
                label: if first { label.into() } else { String::new() },
                color: color.into(),
                points: pts,
                dashed,
            });
            first = false;
        }
    }
    (series, markers)
}

fn profile_csv(header: &str, angles: &[f64], columns: &[Vec<f64>]) -> String {
    let mut s = format!("{header}\n");
    for (i, t) in angles.iter().enumerate() {
        write!(s, "{t}").unwrap();
        for c in columns {
            write!(s, ",{}", c[i]).unwrap();
        }
        s.push('\n');
    }
    s
}

fn fig1b(settings: &Settings, out: &mut Output) -> Result<(), CliError> {
    let mut series = Vec::new();
    let mut markers = Vec::new();
    let mut extent = (0.0, std::f64::consts::PI);
    for (k, z) in ["0.25", "0.5", "1.0", "1.5"].iter().enumerate() {
        let name = format!("fig1b/z12-{z}");
        let config = settings.load(&name)?;
        out.config(&name, &config);
        extent = (config.grid.theta_min, config.grid.theta_max);
        let locus = zero_locus(&scene(&config, settings)?, &config.grid)?;
        out.add(format!("fig1b_z12-{z}_zeros.json"), Kind::Json, locus.to_json());
        out.add(format!("fig1b_z12-{z}_zeros.csv"), Kind::Csv, locus_csv(&locus));
        let (s, m) = locus_graphics(&locus, &format!("z₁₂ = {z} λ₀"), svg::PALETTE[k], false);
        series.extend(s);
        markers.extend(m);
    }
    out.add(
        "fig1b.svg",
        Kind::Svg,
        svg::line_plot(&series, &markers, extent, extent, "Zeros of g²(θ, θ′) in free space", ("θ′ (rad)", "θ (rad)")),
    );
    Ok(())
}

/// Largest `g²` over the refined vertices of `locus`, skipping masked points.
pub fn max_g2_on_locus(scene: &Scene, locus: &ZeroLocus, corr: &CorrelatorSet, floor: f64) -> Result<f64, CliError> {
    let mut worst: f64 = 0.0;
    for v in locus.expanded_vertices() {
        if let Some(g) = scene.g2(v.theta, v.theta_p, corr, floor)? {
            worst = worst.max(g);
        }
    }
    Ok(worst)
}

fn fig2(states: &[State], settings: &Settings, out: &mut Output) -> Result<(), CliError> {
    let mut locus_written = false;
    for &state in states {
        let name = format!("fig2/{}", state.name());
        let config = settings.load(&name)?;
        out.config(&name, &config);
        let sc = scene(&config, settings)?;
        let (couplings, steady) = solve(&config, settings.lmax)?;
        let corr = correlators(&steady.density);
        let grid = config.grid;
        let locus = zero_locus(&sc, &grid)?;
        if !locus_written {
            out.add("fig2_zeros.json", Kind::Json, locus.to_json());
            out.add("fig2_zeros.csv", Kind::Csv, locus_csv(&locus));
            locus_written = true;
        }
        let map = map_sweep(&sc, &grid, Payload::G2, Some(&corr))?;
        let csv = map.to_csv();
        let stem = format!("fig2_{}", state.name());
        out.add(format!("{stem}_g2.json"), Kind::Json, map.sidecar_json(&csv));
        let (overlay, _) = locus_graphics(&locus, "g² = 0", "#00ff66", true);
        out.add(
            format!("{stem}_g2.svg"),
            Kind::Svg,
            svg::heatmap(
                &map.real_values(),
                grid.n,
                (grid.theta_min, grid.theta_max),
                (0.0, 2.0),
                &format!("g²(θ, θ′), {} drive", state.name()),
                "g²",
                &overlay,
                &[],
            ),
        );
        out.add(format!("{stem}_g2.csv"), Kind::Csv, csv);

        let profile = sc.profile(&grid)?;
        let intensity = profile.intensities(&corr);
        out.add(
            format!("{stem}_intensity.csv"),
            Kind::Csv,
            profile_csv("theta,intensity", &profile.angles, std::slice::from_ref(&intensity)),
        );
        let peak = intensity.iter().cloned().fold(0.0, f64::max);
        out.add(
            format!("{stem}_intensity.svg"),
            Kind::Svg,
            svg::line_plot(
                &[Series {
                    label: "⟨I(θ)⟩ / ⟨I_sd⟩".into(),
                    color: svg::PALETTE[0].into(),
                    points: profile.angles.iter().copied().zip(intensity.iter().copied()).collect(),
                    dashed: false,
                }],
                &[],
                (grid.theta_min, grid.theta_max),
                (0.0, if peak > 0.0 { 1.05 * peak } else { 1.0 }),
                &format!("Directional intensity, {} drive", state.name()),
                ("θ (rad)", "intensity"),
            ),
        );
        let tomo = tomography_export(&steady.density);
        out.add(format!("{stem}_tomography.csv"), Kind::Csv, tomo.to_csv());
        out.add(format!("{stem}_tomography.json"), Kind::Json, tomo.to_json());
        let floor = MASK_FLOOR * peak;
        let summary = json!({
            "state": state.name(),
            "couplings": couplings,
            "detuning": config.drive.detuning.resolve(couplings.g12),
            "steady_state_residual": steady.residual,
            "double_excitation": corr.double_excitation,
            "branches": locus.branch_count(),
            "max_g2_on_zero_locus": max_g2_on_locus(&sc, &locus, &corr, floor)?,
        });
        out.add(format!("{stem}_summary.json"), Kind::Json, serde_json::to_string_pretty(&summary).unwrap());
    }
    Ok(())
}

fn fig3a(settings: &Settings, out: &mut Output) -> Result<(), CliError> {
    let mut series = Vec::new();
    let mut markers = Vec::new();
    let mut trivial = String::from("z2,emitter,order,theta\n");
    let mut eps_points = Vec::new();
    let mut extent = (0.0, std::f64::consts::FRAC_PI_2);
    for (k, z2) in ["0.8", "1.7"].iter().enumerate() {
        let name = format!("fig3a/z2-{z2}");
        let config = settings.load(&name)?;
        out.config(&name, &config);
        extent = (config.grid.theta_min, config.grid.theta_max);
        let locus = zero_locus(&scene(&config, settings)?, &config.grid)?;
        out.add(format!("fig3a_z2-{z2}_zeros.json"), Kind::Json, locus.to_json());
        out.add(format!("fig3a_z2-{z2}_zeros.csv"), Kind::Csv, locus_csv(&locus));
        let color = [svg::PALETTE[1], svg::PALETTE[0]][k];
        let (s, m) = locus_graphics(&locus, &format!("z₂ = {z2} λ₀"), color, false);
        series.extend(s);
        markers.extend(m);
        for t in trivial_zeros(&config.dimer, &config.environment)? {
            writeln!(trivial, "{z2},{},{},{}", t.emitter, t.order, t.theta).unwrap();
        }
        let eps = eps_independent_zeros(&config.environment, config.dimer.z1, config.dimer.z2)?;
        for c in eps.verified() {
            markers.push(Marker { x: c.theta_p, y: c.theta, color: "#ff0000".into(), filled: true });
        }
        eps_points.push(json!({ "z2": config.dimer.z2, "result": eps }));
    }
    out.add("fig3a_trivial.csv", Kind::Csv, trivial);
    out.add("fig3a_eps_independent.json", Kind::Json, serde_json::to_string_pretty(&eps_points).unwrap());
    out.add(
        "fig3a.svg",
        Kind::Svg,
        svg::line_plot(&series, &markers, extent, extent, "Zeros of Ψ above a perfect mirror", ("θ′ (rad)", "θ (rad)")),
    );
    Ok(())
}

#[derive(Serialize)]
struct MaskSummary {
    label: String,
    environment: Environment,
    threshold: f64,
    area: f64,
    component_count: usize,
    components: Vec<antibunch::zeros::Component>,
}

fn mask_summary(label: &str, env: &Environment, mask: &MinimaMask) -> MaskSummary {
    MaskSummary {
        label: label.into(),
        environment: *env,
        threshold: mask.threshold,
        area: mask.area(),
        component_count: mask.components.len(),
        components: mask.components.clone(),
    }
}

fn mask_csv_name(prefix: &str, label: &str) -> String {
    format!("{prefix}_{label}_mask.csv")
}

/// `|Ψ|²` mask of a configuration.
pub fn mask_for(config: &Config, settings: &Settings, threshold: f64) -> Result<MinimaMask, CliError> {
    let sc = scene(config, settings)?;
    let map = map_sweep(&sc, &config.grid, Payload::Psi2, None)?;
    Ok(MinimaMask::new(&map.real_values(), &config.grid, threshold, settings.relative))
}

fn fig3b(settings: &Settings, out: &mut Output) -> Result<(), CliError> {
    let mut masks = Vec::new();
    let mut summaries = Vec::new();
    let mut red = Vec::new();
    let mut grid = None;
    for (label, color) in MATERIALS {
        let name = format!("fig3b/{label}");
        let config = settings.load(&name)?;
        out.config(&name, &config);
        let mask = mask_for(&config, settings, settings.threshold)?;
        let eps = eps_independent_zeros(&config.environment, config.dimer.z1, config.dimer.z2)?;
        let points: Vec<_> = eps
            .verified()
            .iter()
            .map(|c| json!({ "theta": c.theta, "theta_prime": c.theta_p, "component": mask.component_at(c.theta, c.theta_p) }))
            .collect();
        if red.is_empty() {
            red = eps.verified().iter().map(|c| Marker { x: c.theta_p, y: c.theta, color: "#ff0000".into(), filled: true }).collect();
        }
        let mut s = serde_json::to_value(mask_summary(label, &config.environment, &mask)).unwrap();
        s["eps_independent_points"] = json!(points);
        summaries.push(s);
        out.add(mask_csv_name("fig3b", label), Kind::Csv, mask.to_csv());
        grid = Some(config.grid);
        masks.push((epsilon_label(&config.environment), color, mask));
    }
    out.add("fig3b_summary.json", Kind::Json, serde_json::to_string_pretty(&summaries).unwrap());
    let grid = grid.expect("three materials");
    let layers: Vec<(&str, &str, &[bool])> = masks.iter().map(|(l, c, m)| (l.as_str(), *c, m.mask.as_slice())).collect();
    out.add(
        "fig3b.svg",
        Kind::Svg,
        svg::mask_overlay(&layers, grid.n, (grid.theta_min, grid.theta_max), "Minima of |Ψ|² above substrates", &[], &red),
    );
    Ok(())
}

fn fig4b(settings: &Settings, out: &mut Output) -> Result<(), CliError> {
    let mut g2_series = Vec::new();
    let mut i_series = Vec::new();
    let mut summary = Vec::new();
    for (label, color) in MATERIALS {
        let name = format!("fig4/{label}");
        let config = settings.load(&name)?;
        out.config(&name, &config);
        let sc = scene(&config, settings)?;
        let (couplings, steady) = solve(&config, settings.lmax)?;
        let corr = correlators(&steady.density);
        let profile = sc.profile(&config.grid)?;
        let intensity = profile.intensities(&corr);
        let floor = MASK_FLOOR * intensity.iter().cloned().fold(0.0, f64::max);
        let g2: Vec<f64> = profile
            .fields
            .iter()
            .map(|f| antibunch::correlation::g2_from_fields(f, f, &corr, floor).unwrap_or(f64::NAN))
            .collect();
        out.add(
            format!("fig4b_{label}.csv"),
            Kind::Csv,
            profile_csv("theta,g2_diagonal,intensity", &profile.angles, &[g2.clone(), intensity.clone()]),
        );
        let legend = epsilon_label(&config.environment);
        g2_series.push(Series {
            label: legend.clone(),
            color: color.into(),
            points: profile.angles.iter().copied().zip(g2).collect(),
            dashed: false,
        });
        i_series.push(Series {
            label: legend,
            color: color.into(),
            points: profile.angles.iter().copied().zip(intensity).collect(),
            dashed: false,
        });
        summary.push(json!({
            "label": label,
            "environment": config.environment,
            "couplings": couplings,
            "steady_state_residual": steady.residual,
            "double_excitation": corr.double_excitation,
        }));
    }
    out.add("fig4b_summary.json", Kind::Json, serde_json::to_string_pretty(&summary).unwrap());
    out.add("fig4b_g2.svg", Kind::Svg, svg::polar_plot(&g2_series, "g²(θ, θ) near a sphere"));
    out.add("fig4b_intensity.svg", Kind::Svg, svg::polar_plot(&i_series, "⟨I(θ)⟩ near a sphere"));
    Ok(())
}

/// Masks for the three sphere materials and the empty-space reference, with
/// the free-space zero curves drawn on top.
fn sphere_masks(prefix: &str, presets: &[(String, &str, &str)], settings: &Settings, out: &mut Output, title: &str) -> Result<(), CliError> {
    let mut masks = Vec::new();
    let mut summaries = Vec::new();
    let mut vacuum = None;
    for (name, label, color) in presets {
        let config = settings.load(name)?;
        out.config(name, &config);
        let mask = mask_for(&config, settings, settings.threshold)?;
        out.add(mask_csv_name(prefix, label), Kind::Csv, mask.to_csv());
        summaries.push((label.to_string(), config.environment, mask.clone()));
        masks.push((epsilon_label(&config.environment), *color, mask));
        if vacuum.is_none() {
            vacuum = Some(vacuum_of(&config));
        }
    }
    let vac = vacuum.expect("at least one material");
    out.config(format!("{prefix} vacuum"), &vac);
    let vac_mask = mask_for(&vac, settings, settings.threshold)?;
    out.add(mask_csv_name(prefix, "vacuum"), Kind::Csv, vac_mask.to_csv());
    let locus = zero_locus(&scene(&vac, settings)?, &vac.grid)?;
    out.add(format!("{prefix}_vacuum_zeros.json"), Kind::Json, locus.to_json());

    let tight = 1e-6;
    let tight_masks = presets
        .iter()
        .map(|(name, _, _)| mask_for(&settings.load(name)?, settings, tight))
        .collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&MinimaMask> = tight_masks.iter().collect();
    let common = MinimaMask::intersection(&refs).iter().filter(|&&b| b).count();
    let body: Vec<_> = summaries
        .iter()
        .map(|(label, env, m)| {
            let mut v = serde_json::to_value(mask_summary(label, env, m)).unwrap();
            v["symmetric_difference_vs_vacuum"] = json!(m.symmetric_difference_area(&vac_mask));
            v
        })
        .collect();
    let summary = json!({
        "materials": body,
        "vacuum_area": vac_mask.area(),
        "tight_threshold": tight,
        "tight_intersection_points": common,
    });
    out.add(format!("{prefix}_summary.json"), Kind::Json, serde_json::to_string_pretty(&summary).unwrap());

    let (curves, pts) = locus_graphics(&locus, "ε = 1 zeros", VACUUM_COLOR, false);
    let grid = vac.grid;
    let layers: Vec<(&str, &str, &[bool])> = masks.iter().map(|(l, c, m)| (l.as_str(), *c, m.mask.as_slice())).collect();
    out.add(
        format!("{prefix}.svg"),
        Kind::Svg,
        svg::mask_overlay(&layers, grid.n, (grid.theta_min, grid.theta_max), title, &curves, &pts),
    );
    Ok(())
}

fn fig4c(settings: &Settings, out: &mut Output) -> Result<(), CliError> {
    let presets: Vec<(String, &str, &str)> = MATERIALS.iter().map(|(l, c)| (format!("fig4/{l}"), *l, *c)).collect();
    sphere_masks("fig4c", &presets, settings, out, "Minima of |Ψ|² near a sphere")
}

fn sm2(panel: Panel, settings: &Settings, out: &mut Output) -> Result<(), CliError> {
    let presets: Vec<(String, &str, &str)> =
        MATERIALS.iter().map(|(l, c)| (format!("sm2/{}-{l}", panel.name()), *l, *c)).collect();
    let prefix = format!("sm2_{}", panel.name());
    sphere_masks(&prefix, &presets, settings, out, &format!("Minima of |Ψ|², panel {}", panel.name()))
}

/// `|c_l| / max_l |c_l|` for the upper emitter.
pub fn normalized_multipoles(m: &SphereMultipoles) -> Vec<f64> {
    let amp: Vec<f64> = (1..=m.l_max()).map(|l| m.coefficient(Side::Upper, l).map_or(0.0, |c| c.norm())).collect();
    let peak = amp.iter().cloned().fold(0.0, f64::max);
    amp.iter().map(|a| if peak > 0.0 { a / peak } else { 0.0 }).collect()
}

/// Order `l` of the largest `|c_l|`.
pub fn dominant_order(m: &SphereMultipoles) -> usize {
    let n = normalized_multipoles(m);
    n.iter().position(|&v| v == 1.0).map_or(0, |i| i + 1)
}

fn fig4d(settings: &Settings, out: &mut Output) -> Result<(), CliError> {
    const SHOWN: usize = 10;
    let mut columns = Vec::new();
    let mut bars = Vec::new();
    let mut summary = Vec::new();
    for (label, color) in MATERIALS {
        let name = format!("fig4/{label}");
        let config = settings.load(&name)?;
        out.config(&name, &config);
        let m = SphereMultipoles::from_environment(&config.environment, settings.lmax)?;
        let mut norm = normalized_multipoles(&m);
        norm.resize(SHOWN.max(norm.len()), 0.0);
        summary.push(json!({
            "label": label,
            "epsilon": format_complex(m.epsilon),
            "dominant_l": dominant_order(&m),
            "l_max_kept": m.l_max(),
            "c": m.c.iter().map(|c: &Complex64| [c.re, c.im]).collect::<Vec<_>>(),
        }));
        bars.push((epsilon_label(&config.environment), color, norm[..SHOWN].to_vec()));
        columns.push(norm);
    }
    let rows = columns.iter().map(Vec::len).max().unwrap_or(0);
    let mut csv = String::from("l");
    for (label, _) in MATERIALS {
        write!(csv, ",{label}").unwrap();
    }
    csv.push('\n');
    for l in 0..rows {
        write!(csv, "{}", l + 1).unwrap();
        for c in &columns {
            write!(csv, ",{}", c.get(l).copied().unwrap_or(0.0)).unwrap();
        }
        csv.push('\n');
    }
    out.add("fig4d.csv", Kind::Csv, csv);
    out.add("fig4d_summary.json", Kind::Json, serde_json::to_string_pretty(&summary).unwrap());
    let labels: Vec<String> = (1..=SHOWN).map(|l| l.to_string()).collect();
    let series: Vec<(&str, &str, Vec<f64>)> = bars.iter().map(|(l, c, v)| (l.as_str(), *c, v.clone())).collect();
    out.add("fig4d.svg", Kind::Svg, svg::bar_chart(&series, &labels, "Normalized multipole amplitudes |c_l|", "|c_l| / max |c_l|"));
    Ok(())
}

/// Map of `payload` for a user configuration.
pub fn run_config(config: &Config, settings: &Settings, payload: Payload, out: &mut Output) -> Result<(), CliError> {
    out.config("run", config);
    let grid: GridSpec = config.grid;
    let sc = scene(config, settings)?;
    let corr = match payload {
        Payload::G2 | Payload::Intensity => {
            let (couplings, steady) = solve(config, settings.lmax)?;
            let tomo = tomography_export(&steady.density);
            out.add("run_tomography.csv", Kind::Csv, tomo.to_csv());
            out.add("run_tomography.json", Kind::Json, tomo.to_json());
            out.add("run_couplings.json", Kind::Json, serde_json::to_string_pretty(&couplings).unwrap());
            Some(correlators(&steady.density))
        }
        Payload::Psi | Payload::Psi2 => None,
    };
    let map = map_sweep(&sc, &grid, payload, corr.as_ref())?;
    let csv = map.to_csv();
    let stem = format!("run_{}", payload.name());
    out.add(format!("{stem}.json"), Kind::Json, map.sidecar_json(&csv));
    if payload != Payload::Psi {
        let values = map.real_values();
        let extent = (grid.theta_min, grid.theta_max);
        let svg = if payload == Payload::G2 {
            svg::heatmap(&values, grid.n, extent, (0.0, 2.0), "g²(θ, θ′)", "g²", &[], &[])
        } else {
            let logs: Vec<f64> = values.iter().map(|v| v.max(1e-12).log10()).collect();
            let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            svg::heatmap(&logs, grid.n, extent, (hi - 8.0, hi), payload.name(), "log₁₀", &[], &[])
        };
        out.add(format!("{stem}.svg"), Kind::Svg, svg);
    }
    out.add(format!("{stem}.csv"), Kind::Csv, csv);
    Ok(())
}
