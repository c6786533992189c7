//! Command implementations, generic over the numeric mode.

use std::time::Instant;

use log::{debug, info};

use ftb_core::bounds::{
    classical_fh_bounds, improved_fh_lower, improved_fh_upper, sharp_upper_order0,
    sharp_upper_order1,
};
use ftb_core::box_hedge::{box_hedge, box_value, HedgeForm, OrthantBox};
use ftb_core::constructions::counterexample_instance;
use ftb_core::instancegen::{generate, GenParams, MAX_ATOMS_PER_AXIS};
use ftb_core::lp::LpStatus;
use ftb_core::measures::JointMeasure;
use ftb_core::numeric::Scalar;
use ftb_core::transport::{
    build_dual, build_primal, check_no_uniform_strong_arbitrage, price_bound, FrechetClass,
    PayoffGrid, TransportError,
};
use ftb_core::ProductGrid;

use crate::instance::{
    decimal_render, AtomDto, ConstraintDto, EnvelopeDto, InstanceFile, LoadedInstance,
    MarginalDto, PayoffDto, RawNumber,
};
use crate::report::{Certificates, HedgeDto, MeasureDto, RunReport, ViolationDto};
use crate::{ClassFlag, CliError, Side};

fn parse_point<T: Scalar>(text: &str, dimension: usize) -> Result<Vec<T>, CliError> {
    let coords = text
        .split(',')
        .map(|s| T::parse_number(s.trim()).map_err(|e| CliError::input(format!("point: {e}"))))
        .collect::<Result<Vec<T>, _>>()?;
    if coords.len() != dimension {
        return Err(CliError::feature(format!(
            "point {text:?} has {} coordinates, instance dimension is {dimension}",
            coords.len()
        )));
    }
    Ok(coords)
}

fn class_of<T: Scalar>(
    inst: &LoadedInstance<T>,
    flag: ClassFlag,
) -> Result<FrechetClass<T>, CliError> {
    Ok(match flag {
        ClassFlag::Exact => FrechetClass::Exact { marginals: inst.marginals.clone() },
        ClassFlag::Order0 => FrechetClass::Order0 { marginals: inst.marginals.clone() },
        ClassFlag::Order1 => {
            let bands = inst.bands.clone().ok_or_else(|| {
                CliError::feature("the order-1 band class needs envelopes in the instance".into())
            })?;
            FrechetClass::Order1Band { bands }
        }
    })
}

fn map_transport_err(e: TransportError) -> CliError {
    match e {
        TransportError::ClassEmpty("exact") => CliError::empty_class(
            "the class is empty: a uniform strong arbitrage exists for this instance".into(),
        ),
        TransportError::ClassEmpty(name) => {
            CliError::empty_class(format!("the {name} class is empty for this instance"))
        }
        TransportError::DimensionMismatch { expected, got } => {
            CliError::feature(format!("expected dimension {expected}, got {got}"))
        }
        other => CliError::input(other.to_string()),
    }
}

pub fn cmd_bounds<T: Scalar>(
    inst: &LoadedInstance<T>,
    points: &[String],
    class: Option<ClassFlag>,
    args: Vec<String>,
) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let mut report = RunReport::new::<T>("bounds", args);
    for text in points {
        let x = parse_point::<T>(text, inst.marginals.len())?;
        let tag = |name: &str| format!("{name}({text})");
        let (clo, chi) = classical_fh_bounds(&inst.marginals, &x)
            .map_err(|e| CliError::feature(e.to_string()))?;
        report.push_value(tag("classical_lower"), &clo);
        report.push_value(tag("classical_upper"), &chi);
        let ilo = improved_fh_lower(&inst.marginals, &inst.constraints, &x)
            .map_err(|e| CliError::feature(e.to_string()))?;
        let ihi = improved_fh_upper(&inst.marginals, &inst.constraints, &x)
            .map_err(|e| CliError::feature(e.to_string()))?;
        report.push_value(tag("improved_lower"), &ilo);
        report.push_value(tag("improved_upper"), &ihi);
        if class.is_none() || class == Some(ClassFlag::Order0) {
            let v = sharp_upper_order0(&inst.marginals, &inst.constraints, &x)
                .map_err(|e| CliError::feature(e.to_string()))?;
            report.push_value(tag("sharp_upper_order0"), &v);
        }
        if class.is_none() || class == Some(ClassFlag::Order1) {
            let v = sharp_upper_order1(&inst.marginals, &inst.constraints, &x)
                .map_err(|e| CliError::feature(e.to_string()))?;
            report.push_value(tag("sharp_upper_order1"), &v);
        }
    }
    report.statuses.push("ok".into());
    report.timing_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

pub fn cmd_price<T: Scalar>(
    inst: &LoadedInstance<T>,
    class_flag: ClassFlag,
    side: Side,
    tol: &T,
    args: Vec<String>,
) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let class = class_of(inst, class_flag)?;
    let grid = class.grid().map_err(map_transport_err)?;
    let payoff = inst.payoff_on(grid.clone())?;
    info!("pricing over the {} class on a {}-point grid", class.name(), grid.num_points());
    let mut report = RunReport::new::<T>("price", args);
    match side {
        Side::Both => {
            let pb = price_bound(&class, &inst.constraints, &payoff, tol)
                .map_err(map_transport_err)?;
            report.push_value("value", &pb.value);
            report.push_value("primal_value", &pb.primal_value);
            report.push_value("dual_value", &pb.dual_value);
            report.certificates.plan = Some(MeasureDto::from_measure(&pb.plan));
            report.certificates.hedge = Some(HedgeDto::from_hedge(&pb.hedge));
            report.statuses.push("optimal".into());
        }
        Side::Primal => {
            let lp = build_primal(&class, &inst.constraints, &payoff)
                .map_err(map_transport_err)?;
            debug!("primal LP: {} vars, {} rows", lp.num_vars(), lp.num_rows());
            let sol = lp.solve().map_err(|e| CliError::input(e.to_string()))?;
            if sol.status != LpStatus::Optimal {
                return Err(map_transport_err(TransportError::ClassEmpty(class.name())));
            }
            report.push_value("primal_value", &sol.objective_value);
            let masses =
                sol.primal.iter().map(|m| if *m < T::zero() { T::zero() } else { m.clone() }).collect();
            let plan = JointMeasure::new(grid, masses)
                .map_err(|e| CliError::input(e.to_string()))?;
            report.certificates.plan = Some(MeasureDto::from_measure(&plan));
            report.statuses.push("optimal".into());
        }
        Side::Dual => {
            let lp = build_dual(&class, &inst.constraints, &payoff).map_err(map_transport_err)?;
            debug!("dual LP: {} vars, {} rows", lp.num_vars(), lp.num_rows());
            let sol = lp.solve().map_err(|e| CliError::input(e.to_string()))?;
            if sol.status != LpStatus::Optimal {
                return Err(map_transport_err(TransportError::ClassEmpty(class.name())));
            }
            report.push_value("dual_value", &sol.objective_value);
            report.statuses.push("optimal".into());
        }
    }
    report.timing_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

pub fn cmd_hedge_box<T: Scalar>(
    inst: &LoadedInstance<T>,
    corner_text: &str,
    decompose: bool,
    value_only: bool,
    args: Vec<String>,
) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let d = inst.marginals.len();
    let corner = parse_point::<T>(corner_text, d)?;
    let b = OrthantBox::new(corner.clone());
    let mut report = RunReport::new::<T>("hedge-box", args);
    let value = box_value(&inst.marginals, &inst.constraints, &b)
        .map_err(|e| CliError::feature(e.to_string()))?;
    report.push_value("box_value", &value);
    let want_decomposition = decompose || (d == 2 && !value_only);
    if want_decomposition {
        if d != 2 {
            return Err(CliError::feature(format!(
                "the hedge decomposition needs dimension 2, instance has dimension {d}"
            )));
        }
        let res = box_hedge(&inst.marginals, &inst.constraints, &b)
            .map_err(|e| CliError::feature(e.to_string()))?;
        let form = match res.form {
            HedgeForm::VerticalStrip => "vertical_strip".to_string(),
            HedgeForm::HorizontalStrip => "horizontal_strip".to_string(),
            HedgeForm::BoxPlusStrips(i) => format!("box_plus_strips({i})"),
        };
        report.push_value("hedge_price", &res.portfolio.price);
        report.certificates.hedge_form = Some(form);
        report.certificates.hedge = Some(HedgeDto::from_hedge(&res.portfolio));
    }
    report.statuses.push("ok".into());
    report.timing_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

pub fn cmd_counterexample<T: Scalar>(args: Vec<String>) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let (marginals, constraints, table) = counterexample_instance::<T>();
    let x = [T::zero(), T::one()];
    let mut report = RunReport::new::<T>("counterexample", args);
    let bound = improved_fh_upper(&marginals, &constraints, &x)
        .map_err(|e| CliError::input(e.to_string()))?;
    report.push_value("improved_upper(0,1)", &bound);
    let class = FrechetClass::Exact { marginals };
    let grid = class.grid().map_err(map_transport_err)?;
    let payoff = PayoffGrid::lower_orthant_indicator(grid, x.to_vec())
        .map_err(map_transport_err)?;
    let pb = price_bound(&class, &constraints, &payoff, &T::default_tol())
        .map_err(map_transport_err)?;
    report.push_value("exact_class_max(0,1)", &pb.value);
    let gap = bound - pb.value;
    report.push_value("separation", &gap);
    report.certificates.plan = Some(MeasureDto::from_measure(&pb.plan));
    report.certificates.hedge = Some(HedgeDto::from_hedge(&pb.hedge));
    report.certificates.witness = Some(MeasureDto::from_measure(&table));
    report
        .statuses
        .push("the improved upper envelope is not attained by any member at (0,1)".into());
    report.timing_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

pub fn cmd_arbitrage<T: Scalar>(
    inst: &LoadedInstance<T>,
    args: Vec<String>,
) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let mut report = RunReport::new::<T>("arbitrage", args);
    let check = check_no_uniform_strong_arbitrage(&inst.marginals, &inst.constraints)
        .map_err(map_transport_err)?;
    if check.arbitrage_free {
        report.statuses.push("no uniform strong arbitrage: the class is nonempty".into());
        let witness = check.witness.expect("witness accompanies the nonempty case");
        report.certificates.witness = Some(MeasureDto::from_measure(&witness));
    } else {
        report.statuses.push(
            "uniform strong arbitrage: the class is empty; see the arbitrage certificate".into(),
        );
        let portfolio = check.arbitrage.expect("portfolio accompanies the empty case");
        report.push_value("arbitrage_price", &portfolio.price);
        report.certificates.arbitrage = Some(HedgeDto::from_hedge(&portfolio));
    }
    report.timing_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Builds the instance file for a seeded random feasible instance. Every
/// number is a multiple of 1/100 (1/10000 for the envelopes), rendered as a
/// plain decimal string, so the file parses exactly in both numeric modes.
pub fn cmd_gen(
    seed: u64,
    dimension: usize,
    grid: usize,
    n_constraints: usize,
) -> Result<InstanceFile, CliError> {
    if grid > MAX_ATOMS_PER_AXIS {
        return Err(CliError::input(format!(
            "grid size {grid} exceeds the maximum of {MAX_ATOMS_PER_AXIS} atoms per axis"
        )));
    }
    let params = GenParams { seed, dimension, atoms_per_axis: grid, n_constraints };
    let inst = generate::<num_rational::BigRational>(&params)
        .map_err(|e| CliError::input(e.to_string()))?;
    let marginal_dto = |m: &ftb_core::measures::DiscreteMarginal<num_rational::BigRational>| {
        MarginalDto {
            atoms: m
                .atoms()
                .iter()
                .map(|(p, w)| AtomDto {
                    point: RawNumber::Str(decimal_render(p)),
                    mass: RawNumber::Str(decimal_render(w)),
                })
                .collect(),
        }
    };
    let marginals = inst.marginals.iter().map(marginal_dto).collect();
    let constraints = inst
        .constraints
        .iter()
        .map(|c| ConstraintDto {
            corner: c.corner().iter().map(|v| RawNumber::Str(decimal_render(v))).collect(),
            pi_lower: RawNumber::Str(decimal_render(c.pi_lower())),
            pi_upper: RawNumber::Str(decimal_render(c.pi_upper())),
        })
        .collect();
    let envelopes = inst
        .bands
        .iter()
        .map(|b| EnvelopeDto {
            lower: marginal_dto(&b.lower_envelope),
            upper: marginal_dto(&b.upper_envelope),
        })
        .collect();
    // default payoff: the indicator of the orthant at the witness grid median
    let grid_axes = ProductGrid::from_marginals(&inst.marginals)
        .map_err(|e| CliError::input(e.to_string()))?;
    let corner: Vec<RawNumber> = (0..dimension)
        .map(|j| {
            let axis = grid_axes.axis(j);
            RawNumber::Str(decimal_render(&axis[axis.len() / 2]))
        })
        .collect();
    Ok(InstanceFile {
        dimension,
        marginals,
        constraints,
        envelopes: Some(envelopes),
        payoff: Some(PayoffDto::LowerOrthantIndicator { corner }),
    })
}
