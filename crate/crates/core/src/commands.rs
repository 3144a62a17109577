//! Report-producing entry points shared by the command-line tool and tests.
//!
//! Every command returns a [`Report`]. Failing hypotheses become failing
//! records with witnesses; only unreadable or inconsistent input is an
//! `Err`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::bundle::HilbertBundle;
use crate::error::{Error, Result};
use crate::hilbert_lin::{
    invariant_representation, minimal_linearisation, minimal_linearisation_with,
    minimality_defects, partial_isometry_report, reconstruction_residual, rkhs,
    unitary_equivalence, verify_reproducing,
};
use crate::io::{build_bundle, build_kernel, Instance, InstanceDoc};
use crate::kernel::{
    conv_blocks, is_invariant, kernel_inclusion_residual, scale_of, ActionFrame, OpKernel,
    Partition, ShiftBound,
};
use crate::krein_core::{gap_report, lift_operator, FINITE_COLLAPSE_NOTE};
use crate::krein_lin::{
    canonical_dominant, fundamental_reducibility_check, gram_operator,
    invariant_krein_representation, jordan_split, krein_equivalence, krein_linearisation,
    krein_minimality_defects, krein_reconstruction_residual, rk_krein_space, Reducibility, Route,
};
use crate::numlin::{herm_eig, hermitian_residual, psd_factor, TieBreak, Tolerances};
use crate::report::{Record, Report};
use crate::sgpd::{LeftAction, StarSemigroupoid, ValidationReport};

pub const DISJOINTNESS_NOTE: &str =
    "disjointness of K₊ and K₋ is certified by rank(G⁺) + rank(G⁻) = rank(G⁺ + G⁻): \
     in finite dimensions a positive kernel below both has range inside ran G⁺ ∩ ran G⁻ = {0}";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Hermitian,
    Psd,
    Invariant,
    Bounded,
    Orbit,
}

impl CheckKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "hermitian" => Self::Hermitian,
            "psd" => Self::Psd,
            "invariant" => Self::Invariant,
            "bounded" => Self::Bounded,
            "orbit" => Self::Orbit,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Hermitian => "hermitian",
            Self::Psd => "psd",
            Self::Invariant => "invariant",
            Self::Bounded => "bounded",
            Self::Orbit => "orbit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Classify,
    Check(CheckKind),
    LinearizeHilbert,
    LinearizeKrein,
    Split,
    RepresentHilbert,
    RepresentKrein {
        dominant: Option<OpKernel>,
        reducibility: bool,
    },
    Lift,
    Report,
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Self::Classify => "classify".into(),
            Self::Check(k) => format!("check {}", k.name()),
            Self::LinearizeHilbert => "linearize --hilbert".into(),
            Self::LinearizeKrein => "linearize --krein".into(),
            Self::Split => "split".into(),
            Self::RepresentHilbert => "represent --hilbert".into(),
            Self::RepresentKrein {
                dominant,
                reducibility,
            } => {
                let mut s = String::from("represent --krein");
                if dominant.is_some() {
                    s.push_str(" --dominant");
                }
                if *reducibility {
                    s.push_str(" --reducibility");
                }
                s
            }
            Self::Lift => "lift".into(),
            Self::Report => "report".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub tol: Tolerances,
    /// Random probe vectors per part for reproducing-property checks.
    pub probes: usize,
    pub seed: u64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            probes: 4,
            seed: 0,
        }
    }
}

fn axiom_records(rep: &mut Report, v: &ValidationReport, axioms: &[&str], tag: &'static str) {
    for ax in axioms {
        let hits: Vec<_> = v.violations.iter().filter(|x| x.axiom == *ax).collect();
        let rec = Record::bound(format!("axiom {ax}"), tag, hits.len() as f64, 0.0);
        rep.push(
            rec.witness_if_failed(|| format!("{}: {}", hits[0].witness.join(", "), hits[0].detail)),
        );
    }
}

const SG_AXIOMS: &[&str] = &[
    "nonempty",
    "isolated-symbol",
    "composition",
    "associativity",
    "star-domain",
    "star-antimultiplicative",
    "star-involutive",
    "unit-injective",
    "unit-domain",
    "left-unit",
    "right-unit",
    "unit-star",
];
const ACTION_AXIOMS: &[&str] = &["anchor-surjective", "action-domain", "action-composition"];

/// Axiom checks that report violations instead of refusing the instance.
pub fn validate(doc: &InstanceDoc, opts: &Options) -> Result<Report> {
    let loose = doc_tables(doc)?;
    let digest = Instance::doc_digest(doc);
    let mut rep = Report::new("validate", digest, opts.tol);
    let v = loose.0.validate();
    axiom_records(&mut rep, &v, SG_AXIOMS, "axioms.semigroupoid");
    let unexpected: Vec<_> = v
        .violations
        .iter()
        .filter(|x| !SG_AXIOMS.contains(&x.axiom.as_str()))
        .collect();
    if let Some(x) = unexpected.first() {
        rep.push(
            Record::bound(
                format!("axiom {}", x.axiom),
                "axioms.semigroupoid",
                unexpected.len() as f64,
                0.0,
            )
            .with_witness(x.detail.clone()),
        );
    }
    if !v.is_valid() {
        return Ok(rep);
    }
    let (sg, bundle) = (Arc::new(loose.0), Arc::new(loose.1));
    let act = crate::io::build_action_unchecked(&sg, &doc.action, &bundle)?;
    let av = act.validate_action(false);
    axiom_records(&mut rep, &av, ACTION_AXIOMS, "axioms.action");
    if !av.is_valid() {
        return Ok(rep);
    }
    rep.push(orbit_record(&act, &bundle)?);
    if let Some(k) = &doc.kernel {
        build_kernel(k, &bundle)?;
    }
    Ok(rep)
}

fn doc_tables(doc: &InstanceDoc) -> Result<(StarSemigroupoid, HilbertBundle)> {
    let sg = crate::io::build_semigroupoid_unchecked(&doc.semigroupoid)?;
    Ok((sg, build_bundle(&doc.bundle)?))
}

pub fn run(cmd: &Command, inst: &Instance, opts: &Options) -> Result<Report> {
    let mut rep = Report::new(cmd.name(), inst.digest(), opts.tol);
    match cmd {
        Command::Classify => classify(&mut rep, inst)?,
        Command::Check(kind) => check(&mut rep, inst, *kind, opts)?,
        Command::LinearizeHilbert => linearize_hilbert(&mut rep, inst, opts)?,
        Command::LinearizeKrein => linearize_krein(&mut rep, inst, opts)?,
        Command::Split => split(&mut rep, inst, opts)?,
        Command::RepresentHilbert => represent_hilbert(&mut rep, inst, opts)?,
        Command::RepresentKrein {
            dominant,
            reducibility,
        } => represent_krein(&mut rep, inst, opts, dominant.as_ref(), *reducibility)?,
        Command::Lift => lift(&mut rep, inst, opts)?,
        Command::Report => full_report(&mut rep, inst, opts)?,
    }
    Ok(rep)
}

fn classify(rep: &mut Report, inst: &Instance) -> Result<()> {
    let sg = &inst.semigroupoid;
    let c = sg.classify()?;
    rep.push(Record::bound(
        "semigroupoid axioms",
        "axioms.semigroupoid",
        0.0,
        0.0,
    ));
    rep.info("elements", sg.len());
    rep.info("symbols", sg.symbol_count());
    rep.info("has_unit", c.has_unit);
    rep.info("transitive", c.is_transitive);
    rep.info("inverse", c.is_inverse);
    rep.info("groupoid", c.is_groupoid);
    rep.info("star_is_inverse", c.star_is_inverse);
    Ok(())
}

fn partition(inst: &Instance) -> Result<Partition> {
    Partition::from_anchor(&inst.action, &inst.bundle)
}

fn orbit_record(act: &LeftAction, bundle: &HilbertBundle) -> Result<Record> {
    let bad = act.orbit_mismatch(bundle)?;
    Ok(Record::bound(
        "orbit-trivial bundle",
        "bundle.orbit-trivial",
        bad.is_some() as u8 as f64,
        0.0,
    )
    .witness_if_failed(|| {
        format!(
            "orbit of `{}` meets another fiber dimension",
            bundle.label(bad.unwrap())
        )
    }))
}

/// Frame, or a failing orbit record.
fn frame(rep: &mut Report, inst: &Instance) -> Result<Option<ActionFrame>> {
    let rec = orbit_record(&inst.action, &inst.bundle)?;
    if !rep.push(rec) {
        return Ok(None);
    }
    Ok(Some(inst.frame()?))
}

fn hermitian_records(rep: &mut Report, k: &OpKernel, p: &Partition, tol: &Tolerances) -> bool {
    let mut ok = true;
    for (s, g) in conv_blocks(k, p).iter().enumerate() {
        let r = hermitian_residual(g) / scale_of(g);
        ok &= rep.push(
            Record::bound(
                format!("hermitian part {}", p.label(s)),
                "kernel.hermitian",
                r,
                tol.atol,
            )
            .witness_if_failed(|| format!("part {}", p.label(s))),
        );
    }
    ok
}

fn psd_records(rep: &mut Report, k: &OpKernel, p: &Partition, tol: &Tolerances) -> Result<bool> {
    let mut ok = true;
    for (s, g) in conv_blocks(k, p).iter().enumerate() {
        let herm = hermitian_residual(g) / scale_of(g);
        let name = format!("psd part {}", p.label(s));
        if herm > tol.atol {
            ok &= rep.push(
                Record::bound(name, "kernel.psd", herm, tol.atol)
                    .with_witness(format!("part {} is not Hermitian", p.label(s))),
            );
            continue;
        }
        let eig = herm_eig(g, tol)?;
        let min = eig.eigenvalues.first().copied().unwrap_or(0.0);
        let r = (-min).max(0.0) / eig.max_abs().max(1.0);
        ok &= rep.push(
            Record::bound(name, "kernel.psd", r, tol.atol)
                .witness_if_failed(|| format!("part {} has eigenvalue {min:e}", p.label(s))),
        );
    }
    Ok(ok)
}

fn invariance_record(
    rep: &mut Report,
    k: &OpKernel,
    frame: &ActionFrame,
    tol: &Tolerances,
) -> bool {
    let inv = is_invariant(k, frame, tol);
    let act = frame.action();
    let sg = act.semigroupoid();
    rep.push(
        Record::bound("invariance", "kernel.invariant", inv.residual, inv.bound).witness_if_failed(
            || {
                let (a, x, y) = inv.witness.expect("failing check has a witness");
                format!("({}, {}, {})", sg.label(a), act.label(x), act.label(y))
            },
        ),
    )
}

fn check(rep: &mut Report, inst: &Instance, kind: CheckKind, opts: &Options) -> Result<()> {
    let tol = &opts.tol;
    match kind {
        CheckKind::Orbit => {
            rep.push(orbit_record(&inst.action, &inst.bundle)?);
        }
        CheckKind::Hermitian => {
            hermitian_records(rep, inst.require_kernel()?, &partition(inst)?, tol);
        }
        CheckKind::Psd => {
            psd_records(rep, inst.require_kernel()?, &partition(inst)?, tol)?;
        }
        CheckKind::Invariant => {
            let k = inst.require_kernel()?;
            if let Some(f) = frame(rep, inst)? {
                invariance_record(rep, k, &f, tol);
            }
        }
        CheckKind::Bounded => {
            let k = inst.require_kernel()?;
            if let Some(f) = frame(rep, inst)? {
                if psd_records(rep, k, f.partition(), tol)? {
                    bounded_records(rep, k, &f, tol)?;
                }
            }
        }
    }
    Ok(())
}

fn bounded_records(
    rep: &mut Report,
    k: &OpKernel,
    frame: &ActionFrame,
    tol: &Tolerances,
) -> Result<()> {
    let sg = frame.action().semigroupoid();
    let grams = conv_blocks(k, frame.partition());
    let mut values = BTreeMap::new();
    for a in sg.elems() {
        let (d, c) = (sg.d(a).0, sg.c(a).0);
        let null = psd_factor(&grams[d], tol)?.null;
        let r = kernel_inclusion_residual(&grams[c], &frame.shift(a), &null);
        rep.push(
            Record::bound(
                format!("shift bound {}", sg.label(a)),
                "kernel.bounded-shift",
                r,
                tol.atol,
            )
            .witness_if_failed(|| sg.label(a).to_string()),
        );
        if let ShiftBound::Bounded(m) = crate::kernel::bounded_shift_constant(k, frame, a, tol)? {
            values.insert(sg.label(a).to_string(), m);
        }
    }
    rep.info("shift_constants", values);
    Ok(())
}

fn linearize_hilbert(rep: &mut Report, inst: &Instance, opts: &Options) -> Result<()> {
    let (k, p, tol) = (inst.require_kernel()?, partition(inst)?, &opts.tol);
    if !psd_records(rep, k, &p, tol)? {
        return Ok(());
    }
    let lin = minimal_linearisation(k, &p, tol)?;
    rep.info(
        "dims",
        p.parts()
            .iter()
            .enumerate()
            .map(|(s, (l, _))| (l.clone(), lin.rank(s)))
            .collect::<BTreeMap<_, _>>(),
    );
    rep.push(Record::bound(
        "reconstruction",
        "hilbert.linearisation",
        reconstruction_residual(&lin, k),
        tol.atol,
    ));
    let defects = minimality_defects(&lin, tol)?;
    rep.push(
        Record::bound(
            "minimality",
            "hilbert.linearisation",
            defects.len() as f64,
            0.0,
        )
        .witness_if_failed(|| format!("part {}", p.label(defects[0]))),
    );
    let r = verify_reproducing(&rkhs(k, &lin), tol, opts.probes, opts.seed)?;
    rep.push(Record::bound(
        "kernel columns in space",
        "hilbert.rkhs",
        r.columns_in_space,
        tol.atol,
    ));
    rep.push(Record::bound(
        "reproducing property",
        "hilbert.rkhs",
        r.reproducing,
        tol.atol,
    ));
    rep.push(Record::bound(
        "column Gram",
        "hilbert.rkhs",
        r.column_gram,
        tol.atol,
    ));
    rep.push(Record::bound(
        "columns span",
        "hilbert.rkhs",
        (!r.spanning) as u8 as f64,
        0.0,
    ));
    let other = minimal_linearisation_with(k, &p, tol, TieBreak::Reversed)?;
    let eq = unitary_equivalence(&lin, &other)?;
    rep.push(Record::bound(
        "unitarity",
        "hilbert.uniqueness",
        eq.unitarity,
        tol.atol,
    ));
    rep.push(Record::bound(
        "intertwining",
        "hilbert.uniqueness",
        eq.intertwining,
        tol.atol,
    ));
    Ok(())
}

fn linearize_krein(rep: &mut Report, inst: &Instance, opts: &Options) -> Result<()> {
    let (k, p, tol) = (inst.require_kernel()?, partition(inst)?, &opts.tol);
    if !hermitian_records(rep, k, &p, tol) {
        return Ok(());
    }
    let lin = krein_linearisation(k, &p, tol, &Route::Direct)?;
    rep.info("route", lin.route().name());
    rep.info(
        "signatures",
        p.parts()
            .iter()
            .enumerate()
            .map(|(s, (l, _))| (l.clone(), lin.part(s).space.signature()))
            .collect::<BTreeMap<_, _>>(),
    );
    rep.push(Record::bound(
        "reconstruction",
        "krein.linearisation",
        krein_reconstruction_residual(&lin, k),
        tol.atol,
    ));
    let defects = krein_minimality_defects(&lin, tol)?;
    rep.push(
        Record::bound(
            "minimality",
            "krein.linearisation",
            defects.len() as f64,
            0.0,
        )
        .witness_if_failed(|| format!("part {}", p.label(defects[0]))),
    );
    let r = rk_krein_space(&lin, tol, opts.probes, opts.seed)?;
    rep.push(Record::bound(
        "kernel columns in space",
        "krein.rkks",
        r.columns_in_space,
        tol.atol,
    ));
    rep.push(Record::bound(
        "reproducing property",
        "krein.rkks",
        r.reproducing,
        tol.atol,
    ));
    rep.push(Record::bound(
        "column Gram",
        "krein.rkks",
        r.column_gram,
        tol.atol,
    ));

    let l = canonical_dominant(k, &p, tol)?;
    gram_records(rep, k, &l, &p, tol)?;
    let via = krein_linearisation(k, &p, tol, &Route::Dominant(l))?;
    rep.push(Record::bound(
        "reconstruction via dominant",
        "krein.linearisation",
        krein_reconstruction_residual(&via, k),
        tol.atol,
    ));
    let eq = krein_equivalence(&lin, &via)?;
    rep.push(Record::bound(
        "J-unitarity",
        "krein.route-equivalence",
        eq.j_unitarity,
        tol.atol,
    ));
    rep.push(Record::bound(
        "intertwining",
        "krein.route-equivalence",
        eq.intertwining,
        tol.atol,
    ));
    Ok(())
}

/// Gram operator and uniqueness records for `K` against `L`.
fn gram_records(
    rep: &mut Report,
    k: &OpKernel,
    l: &OpKernel,
    p: &Partition,
    tol: &Tolerances,
) -> Result<bool> {
    let data = match gram_operator(k, l, p, tol) {
        Ok(d) => d,
        Err(e @ (Error::KernelNotDominated { .. } | Error::NotPartiallyPsd(_))) => {
            rep.push(
                Record::bound("Gram operator", "krein.gram-operator", 1.0, tol.atol)
                    .with_witness(e.to_string()),
            );
            return Ok(false);
        }
        Err(e) => return Err(e),
    };
    let mut gaps = BTreeMap::new();
    for (s, gp) in data.parts.iter().enumerate() {
        let label = p.label(s);
        rep.push(Record::bound(
            format!("Gram identity part {label}"),
            "krein.gram-operator",
            gp.identity,
            tol.atol,
        ));
        rep.push(Record::bound(
            format!("contraction part {label}"),
            "krein.gram-operator",
            (gp.norm - 1.0).max(0.0),
            tol.atol,
        ));
        let g = gap_report(gp.gaps, gp.norm);
        rep.push(Record::bound(
            format!("gap at zero part {label}"),
            "krein.uniqueness",
            (!g.unique) as u8 as f64,
            0.0,
        ));
        gaps.insert(label.to_string(), g);
    }
    rep.info("uniqueness", gaps);
    rep.note(FINITE_COLLAPSE_NOTE);
    Ok(true)
}

fn split(rep: &mut Report, inst: &Instance, opts: &Options) -> Result<()> {
    let (k, p, tol) = (inst.require_kernel()?, partition(inst)?, &opts.tol);
    if !hermitian_records(rep, k, &p, tol) {
        return Ok(());
    }
    let j = jordan_split(k, &p, tol)?;
    rep.push(Record::bound(
        "K₊ − K₋ = K",
        "krein.jordan-split",
        j.reconstruction,
        tol.atol,
    ));
    rep.push(Record::bound(
        "K₊, K₋ positive",
        "krein.jordan-split",
        (!j.psd) as u8 as f64,
        0.0,
    ));
    for (s, &(a, b, c)) in j.ranks.iter().enumerate() {
        rep.push(
            Record::bound(
                format!("disjointness part {}", p.label(s)),
                "krein.jordan-split",
                (a + b).abs_diff(c) as f64,
                0.0,
            )
            .witness_if_failed(|| format!("ranks {a} + {b} ≠ {c}")),
        );
    }
    rep.info("ranks", j.ranks.clone());
    rep.note(DISJOINTNESS_NOTE);
    Ok(())
}

fn represent_hilbert(rep: &mut Report, inst: &Instance, opts: &Options) -> Result<()> {
    let (k, tol) = (inst.require_kernel()?, &opts.tol);
    let Some(f) = frame(rep, inst)? else {
        return Ok(());
    };
    let psd = psd_records(rep, k, f.partition(), tol)?;
    if !(invariance_record(rep, k, &f, tol) && psd) {
        return Ok(());
    }
    let r = match invariant_representation(k, &f, tol) {
        Ok(r) => r,
        Err(Error::QuotientIncompatible(a, res)) => {
            rep.push(
                Record::bound(
                    "quotient compatibility",
                    "kernel.bounded-shift",
                    res,
                    tol.atol,
                )
                .with_witness(a),
            );
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    let res = r.residuals(&f, tol)?;
    rep.push(Record::bound(
        "multiplicativity",
        "hilbert.representation",
        res.multiplicativity,
        tol.atol,
    ));
    rep.push(Record::bound(
        "Φ(α*) = Φ(α)*",
        "hilbert.representation",
        res.star,
        tol.atol,
    ));
    rep.push(Record::bound(
        "Φ(α)V_x = V_{α·x}",
        "hilbert.representation",
        res.intertwining,
        tol.atol,
    ));
    rep.push(Record::bound(
        "M_α = ‖Φ(α)‖²",
        "hilbert.bounded-shift",
        res.bounded_shift,
        tol.atol,
    ));
    let class = inst.semigroupoid.classify()?;
    let pi = partial_isometry_report(&r, &class);
    if pi.required {
        rep.push(Record::bound(
            "partial isometries",
            "hilbert.partial-isometry",
            pi.worst,
            tol.atol,
        ));
    }
    Ok(())
}

fn represent_krein(
    rep: &mut Report,
    inst: &Instance,
    opts: &Options,
    dominant: Option<&OpKernel>,
    reducibility: bool,
) -> Result<()> {
    let (k, tol) = (inst.require_kernel()?, &opts.tol);
    let Some(f) = frame(rep, inst)? else {
        return Ok(());
    };
    let p = f.partition();
    let herm = hermitian_records(rep, k, p, tol);
    if !(invariance_record(rep, k, &f, tol) && herm) {
        return Ok(());
    }
    let (l, supplied) = match dominant {
        Some(l) => {
            if !Arc::ptr_eq(l.bundle(), &inst.bundle) && **l.bundle() != *inst.bundle {
                return Err(Error::BundleMismatch);
            }
            (l.clone(), true)
        }
        None => (canonical_dominant(k, p, tol)?, false),
    };
    let l_inv = is_invariant(&l, &f, tol);
    rep.info("dominant", if supplied { "supplied" } else { "canonical" });
    rep.info("dominant_invariant", l_inv.invariant);
    let dominated = gram_records(rep, k, &l, p, tol)?;
    let use_l = supplied || (reducibility && l_inv.invariant);
    if supplied && !dominated {
        return Ok(());
    }
    let built = invariant_krein_representation(k, &f, tol, use_l.then_some(&l));
    let r = match built {
        Ok(r) => r,
        Err(Error::PairingViolated { residual, bound }) => {
            rep.push(Record::bound("BT = S*A", "krein.lift", residual, bound));
            return Ok(());
        }
        Err(Error::QuotientIncompatible(a, res)) => {
            rep.push(
                Record::bound("quotient compatibility", "krein.lift", res, tol.atol)
                    .with_witness(a),
            );
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    rep.info("route", r.lin.route().name());
    rep.info(
        "signatures",
        p.parts()
            .iter()
            .enumerate()
            .map(|(s, (lab, _))| (lab.clone(), r.lin.part(s).space.signature()))
            .collect::<BTreeMap<_, _>>(),
    );
    let res = r.residuals(&f)?;
    let pairing = r.pairing.iter().fold(0.0_f64, |m, v| m.max(*v));
    rep.push(Record::bound("BT = S*A", "krein.lift", pairing, tol.atol));
    rep.push(Record::bound(
        "reconstruction",
        "krein.linearisation",
        krein_reconstruction_residual(&r.lin, k),
        tol.atol,
    ));
    rep.push(Record::bound(
        "multiplicativity",
        "krein.representation",
        res.multiplicativity,
        tol.atol,
    ));
    rep.push(Record::bound(
        "Ψ̃(α*) = Ψ̃(α)^♯",
        "krein.representation",
        res.sharp,
        tol.atol,
    ));
    rep.push(Record::bound(
        "Ψ̃(α)V_x = V_{α·x}",
        "krein.representation",
        res.intertwining,
        tol.atol,
    ));
    if reducibility {
        match fundamental_reducibility_check(&r, &l, &f, tol)? {
            Reducibility::Checked {
                worst,
                shift_bounds,
                ..
            } => {
                rep.push(Record::bound(
                    "J commutes with Ψ̃",
                    "krein.reducibility",
                    worst,
                    tol.atol,
                ));
                let sg = f.action().semigroupoid();
                let m: BTreeMap<_, _> = sg
                    .elems()
                    .filter_map(|a| {
                        shift_bounds[a.0]
                            .value()
                            .map(|v| (sg.label(a).to_string(), v))
                    })
                    .collect();
                rep.info("dominant_shift_constants", m);
            }
            Reducibility::NotApplicable { reason, witness } => {
                let act = f.action();
                let w = witness.map_or(reason.clone(), |(a, x, y)| {
                    format!(
                        "{reason}; witness ({}, {}, {})",
                        act.semigroupoid().label(a),
                        act.label(x),
                        act.label(y)
                    )
                });
                rep.push(
                    Record::bound(
                        "dominant is invariant",
                        "krein.reducibility",
                        l_inv.residual,
                        l_inv.bound,
                    )
                    .with_witness(w),
                );
            }
        }
    }
    Ok(())
}

fn lift(rep: &mut Report, inst: &Instance, opts: &Options) -> Result<()> {
    let (k, tol) = (inst.require_kernel()?, &opts.tol);
    let Some(f) = frame(rep, inst)? else {
        return Ok(());
    };
    let p = f.partition();
    let herm = hermitian_records(rep, k, p, tol);
    if !(invariance_record(rep, k, &f, tol) && herm) {
        return Ok(());
    }
    let grams = conv_blocks(k, p);
    let sg = f.action().semigroupoid();
    let shifts = f.shifts();
    for a in sg.elems() {
        let (d, c) = (sg.d(a).0, sg.c(a).0);
        let label = sg.label(a);
        match lift_operator(
            &grams[d],
            &grams[c],
            &shifts[a.0],
            &shifts[sg.star(a).0],
            tol,
        ) {
            Ok(l) => {
                rep.push(Record::bound(
                    format!("precondition {label}"),
                    "krein.lift",
                    l.precondition,
                    tol.atol,
                ));
                rep.push(Record::bound(
                    format!("T̃Π_A = Π_BT {label}"),
                    "krein.lift",
                    l.factorisation,
                    tol.atol,
                ));
                rep.push(Record::bound(
                    format!("T̃^♯ = S̃ {label}"),
                    "krein.lift",
                    l.pairing,
                    tol.atol,
                ));
            }
            Err(Error::PairingViolated { residual, bound }) => {
                rep.push(
                    Record::bound(
                        format!("precondition {label}"),
                        "krein.lift",
                        residual,
                        bound,
                    )
                    .with_witness(label),
                );
            }
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn full_report(rep: &mut Report, inst: &Instance, opts: &Options) -> Result<()> {
    classify(rep, inst)?;
    let k = inst.require_kernel()?;
    let p = partition(inst)?;
    let tol = &opts.tol;
    let mut probe = Report::new("", "", *tol);
    let herm = hermitian_records(&mut probe, k, &p, tol);
    let psd = herm && psd_records(&mut probe, k, &p, tol)?;
    let frame_ok = inst.action.orbit_trivial_bundle(&inst.bundle)?;
    let invariant = frame_ok && is_invariant(k, &inst.frame()?, tol).invariant;
    let sub = |cmd: Command, rep: &mut Report| -> Result<()> {
        let r = run(&cmd, inst, opts)?;
        rep.extend(r);
        Ok(())
    };
    sub(Command::Check(CheckKind::Orbit), rep)?;
    sub(Command::Check(CheckKind::Hermitian), rep)?;
    if !herm {
        return Ok(());
    }
    sub(Command::Split, rep)?;
    sub(Command::LinearizeKrein, rep)?;
    if psd {
        sub(Command::LinearizeHilbert, rep)?;
    } else {
        rep.note("kernel is not partially positive semidefinite; Hilbert checks skipped");
    }
    if frame_ok {
        sub(Command::Check(CheckKind::Invariant), rep)?;
    }
    if invariant {
        if psd {
            sub(Command::RepresentHilbert, rep)?;
        }
        sub(
            Command::RepresentKrein {
                dominant: None,
                reducibility: false,
            },
            rep,
        )?;
    } else {
        rep.note("kernel is not invariant; representation checks skipped");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_instance, KernelMode};
    use crate::sgpd::families::Family;

    fn z2(g: [[f64; 2]; 2]) -> Instance {
        let (mut inst, _) =
            generate_instance(&Family::parse("cyclic-rotation:2").unwrap(), 0, 1, None).unwrap();
        let b = Arc::clone(&inst.bundle);
        let p = Partition::single(&b);
        let m = crate::numlin::from_real_rows(&[&g[0], &g[1]]);
        inst.kernel = Some(OpKernel::from_part_matrices(&b, &p, &[m]).unwrap());
        inst
    }

    #[test]
    fn circulant_represents() {
        let inst = z2([[2.0, 1.0], [1.0, 2.0]]);
        let r = run(&Command::RepresentHilbert, &inst, &Options::default()).unwrap();
        assert!(r.pass, "{}", r.to_json());
        assert!(r.records.iter().all(|x| x.residual <= 1e-10));
    }

    #[test]
    fn diag_counterexample_has_witness() {
        let inst = z2([[1.0, 0.0], [0.0, 2.0]]);
        let r = run(
            &Command::Check(CheckKind::Invariant),
            &inst,
            &Options::default(),
        )
        .unwrap();
        assert!(!r.pass);
        let w = r.failures().next().unwrap().witness.clone().unwrap();
        assert!(w.starts_with("(r1, "), "{w}");
    }

    #[test]
    fn swap_krein_with_reducibility() {
        let inst = z2([[0.0, 1.0], [1.0, 0.0]]);
        let b = Arc::clone(&inst.bundle);
        let id =
            OpKernel::from_part_matrices(&b, &Partition::single(&b), &[crate::numlin::identity(2)])
                .unwrap();
        let cmd = Command::RepresentKrein {
            dominant: Some(id),
            reducibility: true,
        };
        let r = run(&cmd, &inst, &Options::default()).unwrap();
        assert!(r.pass, "{}", r.to_json());
        assert!(r.records.iter().any(|x| x.tag == "krein.reducibility"));
        assert!(r
            .notes
            .iter()
            .any(|n| n.contains("unreachable in finite dimensions")));
    }

    #[test]
    fn full_report_on_generated_instances() {
        for (fam, mode) in [
            ("dihedral-action:3", KernelMode::PsdInvariant),
            ("pair-groupoid:2", KernelMode::HermitianInvariant),
            ("partial-bijections:1,1", KernelMode::PsdInvariant),
        ] {
            let (inst, dom) =
                generate_instance(&Family::parse(fam).unwrap(), 4, 2, Some(mode)).unwrap();
            let r = run(&Command::Report, &inst, &Options::default()).unwrap();
            assert!(r.pass, "{fam}: {}", r.to_json());
            let cmd = Command::RepresentKrein {
                dominant: dom,
                reducibility: true,
            };
            let r = run(&cmd, &inst, &Options::default()).unwrap();
            assert!(r.pass, "{fam}: {}", r.to_json());
        }
    }

    #[test]
    fn lift_records_per_element() {
        let inst = z2([[0.0, 1.0], [1.0, 0.0]]);
        let r = run(&Command::Lift, &inst, &Options::default()).unwrap();
        assert!(r.pass);
        assert_eq!(
            r.records
                .iter()
                .filter(|x| x.name.starts_with("T̃^♯"))
                .count(),
            2
        );
    }

    #[test]
    fn validate_reports_axiom_failure() {
        let (inst, _) =
            generate_instance(&Family::parse("cyclic-group:3").unwrap(), 0, 1, None).unwrap();
        let mut doc = inst.to_doc();
        assert!(validate(&doc, &Options::default()).unwrap().pass);
        let last = doc.semigroupoid.compose.len() - 1;
        doc.semigroupoid.compose[last][2] = doc.semigroupoid.compose[0][2].clone();
        let r = validate(&doc, &Options::default()).unwrap();
        assert!(!r.pass);
        assert!(r.failures().next().unwrap().witness.is_some());
    }
}
