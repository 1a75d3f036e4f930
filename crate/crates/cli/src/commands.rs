use std::fmt::Write as _;
use std::path::Path;

use qmoments::bounds::{mixed_inequality_check, root_bound_check, coefficient_inequality_check};
use qmoments::decimal::{format_ball, format_radius, parse_ball};
use qmoments::momentmatch::{
    combined_even_cumulant, cumulants_check, cumulants_from_moments, mixed_system_residuals,
    power_sum_residuals, solve, uniform_moment,
};
use qmoments::qseries::{poly_via_recurrence, truncated_q_exponential, QBase};
use qmoments::quadrature::figure::{emit_svg, emit_text};
use qmoments::quadrature::{enumerate_nodes, exactness_residuals, product_cubature, ruler_check};
use qmoments::{
    Ball, BaseSpec, CoefficientSet, Dyadic, Error, QuadratureFormula, QuadratureNode, Rational,
};

use crate::args::{Command, CommonArgs, CubatureArgs, Format, OutputArgs, VerifyArgs};
use crate::report::{Check, CoefficientsDoc, CubatureDoc, CubatureMeta, NodesDoc, VerifyDoc};

/// Largest precision reached by doubling before giving up.
pub const ESCALATION_LIMIT: u32 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    Usage(String),
    Precision(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Precision(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Precision(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::InvalidSpec(_) | Error::SizeCap { .. } => {
                Failure::Usage(e.to_string())
            }
            Error::Pole(_)
            | Error::Consistency(_)
            | Error::PrecisionEscalation(_)
            | Error::SingularJacobian(_) => Failure::Precision(e.to_string()),
        }
    }
}

/// Command output and whether every check it ran passed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub text: String,
    pub passed: bool,
}

impl Rendered {
    fn ok(text: String) -> Self {
        Rendered { text, passed: true }
    }
}

fn retryable(e: &Error) -> bool {
    matches!(
        e,
        Error::PrecisionEscalation(_) | Error::SingularJacobian(_) | Error::Pole(_)
    )
}

/// Runs `f` at `start` bits, doubling while it asks for more precision.
pub fn escalate<T>(start: u32, f: impl Fn(u32) -> qmoments::Result<T>) -> Result<(T, u32), Failure> {
    let mut prec = start;
    loop {
        match f(prec) {
            Ok(v) => return Ok((v, prec)),
            Err(e) if retryable(&e) && prec < ESCALATION_LIMIT => prec = (prec * 2).min(ESCALATION_LIMIT),
            Err(e) => return Err(e.into()),
        }
    }
}

fn certified_solve(spec: &BaseSpec, prec: u32) -> qmoments::Result<CoefficientSet> {
    let cs = solve(spec, prec)?;
    if !cs.converged {
        return Err(Error::PrecisionEscalation(format!(
            "coefficients for {spec} are not certified at {prec} bits"
        )));
    }
    Ok(cs)
}

fn certified_formula(spec: &BaseSpec, prec: u32) -> qmoments::Result<(CoefficientSet, QuadratureFormula)> {
    let cs = certified_solve(spec, prec)?;
    let qf = enumerate_nodes(&cs)?;
    Ok((cs, qf))
}

fn unsupported(command: &str, format: Format) -> Failure {
    Failure::Usage(format!("{command} does not support --format {}", format.name()))
}

fn json<T: serde::Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

pub fn run(command: &Command) -> Result<Rendered, Failure> {
    match command {
        Command::Coeffs(args) => coeffs(args),
        Command::Nodes(args) => nodes(args),
        Command::Verify(args) => verify(args),
        Command::Figure(args) => figure(args),
        Command::Cubature(args) => cubature(args),
    }
}

fn coeffs(args: &CommonArgs) -> Result<Rendered, Failure> {
    let spec = args.spec.to_spec()?;
    let digits = args.out.digits;
    let format = args.out.format.unwrap_or(Format::Json);
    if format == Format::Svg {
        return Err(unsupported("coeffs", format));
    }
    let (cs, _) = escalate(args.out.working_precision(), |prec| certified_solve(&spec, prec))?;
    let doc = CoefficientsDoc::new(&cs, digits);
    let text = match format {
        Format::Json => json(&doc),
        Format::Csv => {
            let mut s = String::new();
            if args.out.csv_header {
                s.push_str("j,base,a,r,b,radius_a,radius_r,radius_b\n");
            }
            for (i, rad) in doc.radius.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    i + 1,
                    doc.bases[i],
                    doc.a[i],
                    doc.r[i],
                    doc.b[i],
                    rad.a,
                    rad.r,
                    rad.b
                );
            }
            s
        }
        _ => {
            let mut s = format!("bases {}  method {}  converged {}\n", spec, doc.method, doc.converged);
            for (i, rad) in doc.radius.iter().enumerate() {
                let _ = writeln!(s, "a_{} = {} +- {}", i + 1, doc.a[i], rad.a);
            }
            s
        }
    };
    Ok(Rendered::ok(text))
}

fn nodes(args: &CommonArgs) -> Result<Rendered, Failure> {
    let spec = args.spec.to_spec()?;
    let format = args.out.format.unwrap_or(Format::Json);
    if format == Format::Svg {
        return Err(unsupported("nodes", format));
    }
    let ((_, qf), _) = escalate(args.out.working_precision(), |prec| certified_formula(&spec, prec))?;
    let doc = NodesDoc::new(&qf, args.out.digits);
    let text = match format {
        Format::Json => json(&doc),
        Format::Csv => {
            let mut s = String::new();
            if args.out.csv_header {
                s.push_str("value,radius");
                for j in 1..=spec.len() {
                    let _ = write!(s, ",x{j}");
                }
                s.push('\n');
            }
            for ((v, r), o) in doc.nodes.iter().zip(&doc.radius).zip(&doc.outcomes) {
                let _ = write!(s, "{v},{r}");
                for x in o {
                    let _ = write!(s, ",{x}");
                }
                s.push('\n');
            }
            s
        }
        _ => {
            let mut s = format!(
                "bases {}  count {}  weight {}  degree {}\n",
                spec, doc.count, doc.weight, doc.degree
            );
            for (v, r) in doc.nodes.iter().zip(&doc.radius) {
                let _ = writeln!(s, "{v} +- {r}");
            }
            s
        }
    };
    Ok(Rendered::ok(text))
}

fn figure(args: &CommonArgs) -> Result<Rendered, Failure> {
    let spec = args.spec.to_spec()?;
    let format = args.out.format.unwrap_or(Format::Svg);
    let ((_, qf), _) = escalate(args.out.working_precision(), |prec| certified_formula(&spec, prec))?;
    let text = match format {
        Format::Svg => emit_svg(&qf)?,
        Format::Text => emit_text(&qf)?,
        _ => return Err(unsupported("figure", format)),
    };
    Ok(Rendered::ok(text))
}

fn cubature(args: &CubatureArgs) -> Result<Rendered, Failure> {
    let spec = args.spec.to_spec()?;
    let digits = args.out.digits;
    let format = args.out.format.unwrap_or(Format::Csv);
    if !matches!(format, Format::Csv | Format::Json) {
        return Err(unsupported("cubature", format));
    }
    let ((_, qf), _) = escalate(args.out.working_precision(), |prec| certified_formula(&spec, prec))?;
    let cub = product_cubature(&qf, args.dim as usize)?;
    let max_radius = qf
        .nodes
        .iter()
        .fold(Dyadic::zero(), |m, n| Dyadic::max(&m, n.value.radius()));
    let meta = CubatureMeta {
        bases: spec.bases().to_vec(),
        q: spec.bases().iter().map(|&p| p as u64 * p as u64).collect(),
        dim: cub.dim,
        points: cub.points.len() as u64,
        weight: cub.weight.to_string(),
        degree: qf.degree,
        max_radius: format_radius(&max_radius),
    };
    // Each axis value is formatted once; the grid reuses the strings.
    let axis: Vec<String> = qf.nodes.iter().map(|n| format_ball(&n.value, digits)).collect();
    let text_of = |b: &Ball| {
        let i = qf.nodes.partition_point(|n| n.value.midpoint() < b.midpoint());
        axis[i].clone()
    };
    let text = match format {
        Format::Json => {
            let coordinates = cub.points.iter().map(|pt| pt.iter().map(text_of).collect()).collect();
            json(&CubatureDoc { meta, coordinates })
        }
        _ => {
            let mut s = format!("# {}\n", serde_json::to_string(&meta).expect("metadata serializes"));
            if args.out.csv_header {
                let cols: Vec<String> = (1..=cub.dim).map(|i| format!("x{i}")).collect();
                let _ = writeln!(s, "{}", cols.join(","));
            }
            for pt in &cub.points {
                let row: Vec<String> = pt.iter().map(text_of).collect();
                let _ = writeln!(s, "{}", row.join(","));
            }
            s
        }
    };
    Ok(Rendered::ok(text))
}

fn all_zero(balls: &[Ball]) -> bool {
    balls.iter().all(Ball::contains_zero)
}

fn exactness_checks(qf: &QuadratureFormula) -> Vec<Check> {
    let res = exactness_residuals(qf, qf.degree + 1);
    let (exact, top) = res.split_at(qf.degree + 1);
    let ruler = ruler_check(qf);
    let ruler_detail = format!(
        "{} cells; bijection {}, inside {}, index = rank {}{}",
        ruler.entries.len(),
        ruler.bijection,
        ruler.all_inside,
        ruler.index_matches_rank,
        if ruler.mixed { "; mixed bases" } else { "" }
    );
    vec![
        Check::new(
            "exactness",
            all_zero(exact),
            format!("monomials of degree 0..={} integrate exactly", qf.degree),
        )
        .with_residual(exact),
        Check::new(
            "sharpness",
            !top[0].contains_zero(),
            format!("degree {} residual excludes 0", qf.degree + 1),
        )
        .with_residual(top),
        Check::new("symmetry", qf.is_negation_closed(), "node set is closed under negation"),
        Check::new("ruler", ruler.passed(), ruler_detail),
    ]
}

fn uniform_cumulants(k: usize) -> Vec<Rational> {
    let mu: Vec<Rational> = (0..=2 * k as u32).map(uniform_moment).collect();
    cumulants_from_moments(&mu)
}

fn spec_checks(spec: &BaseSpec, prec: u32) -> qmoments::Result<Vec<Check>> {
    let (cs, qf) = certified_formula(spec, prec)?;
    let n = spec.len();
    let mut checks = Vec::new();
    match spec.uniform_base() {
        Some(_) => {
            let res = power_sum_residuals(&cs)?;
            checks.push(
                Check::new("power_sums", all_zero(&res), format!("sum b_j^k = 1/(q^k - 1), k = 1..={n}"))
                    .with_residual(&res),
            );
        }
        None => {
            let res = mixed_system_residuals(&cs);
            checks.push(
                Check::new(
                    "mixed_system",
                    all_zero(&res),
                    format!("sum b_j^k (p_j^(2k) - 1) = 1, k = 1..={n}"),
                )
                .with_residual(&res),
            );
        }
    }
    checks.push(Check::new(
        "certified",
        cs.converged && cs.descending,
        format!("method {}; a_1 > ... > a_n > 0 certified", cs.method.as_str()),
    ));

    let ky = uniform_cumulants(n);
    let res: Vec<Ball> = (1..=n)
        .map(|k| combined_even_cumulant(&cs, k) - Ball::from_rational(&ky[2 * k], prec))
        .collect();
    checks.push(
        Check::new("moment_cumulants", all_zero(&res), format!("even cumulants match up to order {}", 2 * n))
            .with_residual(&res),
    );
    checks.extend(exactness_checks(&qf));

    if let Some(p) = spec.uniform_base() {
        let cum = cumulants_check(p, n, prec);
        checks.push(
            Check::new(
                "cumulant_relation",
                cum.passed(),
                "kappa_2k(X_p) = (p^2k - 1) kappa_2k(Y)",
            )
            .with_residual(&cum.residuals),
        );
        let bounds = root_bound_check(p, n, prec)?;
        checks.push(Check::new(
            "root_bounds",
            bounds.passed(),
            "r_{n,j} q^-j lies between 1 and c_k",
        ));
        let thm = coefficient_inequality_check(&cs)?;
        checks.push(Check::new(
            "coefficient_inequality",
            thm.passed(),
            format!(
                "sum |a_j - p^-j| <= {} < {}",
                format_radius(&thm.sum.upper()),
                thm.bound
            ),
        ));
        let q = QBase::square_of(p)?;
        let same = poly_via_recurrence(&q, n).coeffs() == truncated_q_exponential(&q, n).coeffs();
        checks.push(Check::new("recurrence", same, format!("F_(q,<=n) rebuilt for n = {n}")));
    } else {
        let (sum, bound, pass) = mixed_inequality_check(&cs);
        checks.push(Check::new(
            "coefficient_inequality",
            pass,
            format!(
                "sum (p_j - 1) |a_j - prod p^-1| <= {} < {}",
                format_radius(&sum.upper()),
                bound
            ),
        ));
    }
    Ok(checks)
}

fn read_nodes(path: &Path) -> Result<NodesDoc, Failure> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&raw)
        .map_err(|e| Failure::Usage(format!("{} is not a node list: {e}", path.display())))
}

fn file_checks(doc: &NodesDoc, prec: u32) -> Result<(BaseSpec, Vec<Check>), Failure> {
    let spec = BaseSpec::new(doc.bases.clone())?;
    let bad = |what: &str| Failure::Usage(format!("node list: {what}"));
    let count = spec.count();
    if doc.nodes.len() as u128 != count
        || doc.radius.len() != doc.nodes.len()
        || doc.outcomes.len() != doc.nodes.len()
    {
        return Err(bad("node, radius and outcome lists must each have prod p_j entries"));
    }
    let weight: Rational = doc.weight.parse().map_err(|_| bad("weight is not a fraction"))?;
    let mut nodes = Vec::with_capacity(doc.nodes.len());
    for ((v, r), o) in doc.nodes.iter().zip(&doc.radius).zip(&doc.outcomes) {
        let valid = o.len() == spec.len()
            && o.iter().zip(spec.bases()).all(|(&x, &p)| {
                let p = p as i32;
                x.abs() < p && (x + p - 1) % 2 == 0
            });
        if !valid {
            return Err(bad("outcome out of range"));
        }
        nodes.push(QuadratureNode {
            value: parse_ball(v, r, prec)?,
            outcome: o.clone(),
        });
    }
    let qf = QuadratureFormula::from_nodes(spec.clone(), nodes)?;
    let mut checks = vec![Check::new(
        "weight",
        weight == qf.weight,
        format!("weight {} for {} nodes", doc.weight, qf.len()),
    )];
    checks.extend(exactness_checks(&qf));
    Ok((spec, checks))
}

fn verify(args: &VerifyArgs) -> Result<Rendered, Failure> {
    let format = args.out.format.unwrap_or(Format::Json);
    if !matches!(format, Format::Json | Format::Text) {
        return Err(unsupported("verify", format));
    }
    let start = args.out.working_precision();
    let (spec, checks, prec, source) = match &args.from_file {
        Some(path) => {
            let doc = read_nodes(path)?;
            let (spec, checks) = file_checks(&doc, start)?;
            (spec, checks, start, "file")
        }
        None => {
            if args.spec.is_empty() {
                return Err(Failure::Usage("give --p with --n, --bases, or --from-file".into()));
            }
            let spec = args.spec.to_spec()?;
            let (checks, prec) = escalate(start, |prec| spec_checks(&spec, prec))?;
            (spec, checks, prec, "computed")
        }
    };
    let doc = VerifyDoc::new(&spec, source, prec, checks);
    let text = match format {
        Format::Json => json(&doc),
        _ => render_verify_text(&doc),
    };
    Ok(Rendered {
        text,
        passed: doc.passed,
    })
}

fn render_verify_text(doc: &VerifyDoc) -> String {
    let mut s = String::new();
    for c in &doc.checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        let _ = write!(s, "{verdict}  {:<22} {}", c.name, c.detail);
        if let Some(r) = &c.residual {
            let _ = write!(s, "  (residual <= {r})");
        }
        s.push('\n');
    }
    let passed = doc.checks.iter().filter(|c| c.pass).count();
    let _ = writeln!(s, "{passed} of {} checks passed", doc.checks.len());
    s
}

/// Writes `text` to `path`, or to standard output when no path is given.
pub fn emit(out: &OutputArgs, text: &str) -> Result<(), Failure> {
    match &out.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Usage(format!("cannot write output: {e}")))
        }
    }
}
