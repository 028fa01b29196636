use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use anyhow::{bail, Context};
use fdgen::exactmath::factorial;
use fdgen::{
    backward_centered, centered_average_formula, centered_formula, convergence_study, format_rational,
    forward_centered, interior_centered, standard_backward, standard_forward, verify, CorrectionFormula, FdError,
    FormulaId, Rational,
};

use crate::functions::TestFunction;
use crate::CoeffFamily;

fn times_factorial(value: &Rational, i: u32) -> String {
    format_rational(&(value * Rational::from_integer(factorial(i))))
}

struct Table {
    title: String,
    symbol: &'static str,
    rows: Vec<(u32, Rational)>,
    /// Label and `(index, value)` of each error constant.
    constants: Vec<(&'static str, (u32, Rational))>,
}

impl Table {
    fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.title);
        let _ = writeln!(
            out,
            "{:<4} {:>24} {:>24}",
            "i",
            format!("{}_i", self.symbol),
            format!("{}_i * i!", self.symbol)
        );
        for (i, c) in &self.rows {
            let _ = writeln!(
                out,
                "{:<4} {:>24} {:>24}",
                i,
                format_rational(c),
                times_factorial(c, *i)
            );
        }
        for (label, (i, c)) in &self.constants {
            let _ = writeln!(
                out,
                "error constant ({label}): {}_{i} = {} = {} / {i}!",
                self.symbol,
                format_rational(c),
                times_factorial(c, *i)
            );
        }
        out
    }
}

fn merged(symbol: &'static str, title: String, odd: &CorrectionFormula, even: &CorrectionFormula) -> Table {
    let mut rows: Vec<_> = odd
        .table_coefficients()
        .into_iter()
        .chain(even.table_coefficients())
        .collect();
    rows.sort_by_key(|(i, _)| *i);
    Table {
        title,
        symbol,
        rows,
        constants: vec![
            ("derivative", odd.table_error_constant()),
            ("value", even.table_error_constant()),
        ],
    }
}

fn single(symbol: &'static str, title: String, formula: &CorrectionFormula) -> Table {
    Table {
        title,
        symbol,
        rows: formula.table_coefficients(),
        constants: vec![("next term", formula.table_error_constant())],
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn coeffs(family: CoeffFamily, p: u32, json: bool) -> anyhow::Result<bool> {
    match family {
        CoeffFamily::Centered => {
            let (odd, even) = (centered_formula(p)?, centered_average_formula(p)?);
            if json {
                print_json(&[&odd, &even])?;
            } else {
                print!("{}", merged("c", format!("centered, p={p}"), &odd, &even).render());
            }
        }
        CoeffFamily::CenteredAverage => {
            let f = centered_average_formula(p)?;
            if json {
                print_json(&f)?;
            } else {
                print!("{}", single("c", format!("centered average, p={p}"), &f).render());
            }
        }
        CoeffFamily::Interior => {
            let (deriv, value) = interior_centered(p)?;
            if json {
                print_json(&[&deriv, &value])?;
            } else {
                print!(
                    "{}",
                    merged("c^p", format!("interior centered, p={p}"), &deriv, &value).render()
                );
            }
        }
        CoeffFamily::Fc | CoeffFamily::Bc => {
            let (fc, bc) = (forward_centered(p)?, backward_centered(p)?);
            if json {
                print_json(if family == CoeffFamily::Fc { &fc } else { &bc })?;
            } else {
                print!("{}", paired_table(p, &fc, &bc));
            }
        }
        CoeffFamily::F => {
            let f = standard_forward(p)?;
            if json {
                print_json(&f)?;
            } else {
                print!("{}", single("f", format!("standard forward, p={p}"), &f).render());
            }
        }
        CoeffFamily::B => {
            let f = standard_backward(p)?;
            if json {
                print_json(&f)?;
            } else {
                print!("{}", single("b", format!("standard backward, p={p}"), &f).render());
            }
        }
    }
    Ok(true)
}

fn paired_table(p: u32, fc: &CorrectionFormula, bc: &CorrectionFormula) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "forward-centered a_i and backward-centered b_i, p={p}");
    let _ = writeln!(out, "{:<4} {:>24} {:>24} {:>24}", "i", "a_i", "a_i * i!", "b_i");
    let mut rows: Vec<_> = fc
        .table_coefficients()
        .into_iter()
        .zip(bc.table_coefficients())
        .collect();
    rows.push((fc.table_error_constant(), bc.table_error_constant()));
    let last = rows.len() - 1;
    for (n, ((i, a), (_, b))) in rows.iter().enumerate() {
        let note = if n == last { "  (error constant)" } else { "" };
        let _ = writeln!(
            out,
            "{:<4} {:>24} {:>24} {:>24}{note}",
            i,
            format_rational(a),
            times_factorial(a, *i),
            format_rational(b)
        );
    }
    out
}

pub fn stencil(id: &FormulaId) -> anyhow::Result<bool> {
    let stencil = match id.stencil() {
        Ok(s) => s,
        Err(FdError::Verification(report)) => {
            eprintln!("{id}: {report}");
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };
    print_json(&stencil)?;
    let report = verify(&stencil);
    if !report.passed() {
        eprintln!("{id}: {report}");
    }
    Ok(report.passed())
}

pub struct GridOptions {
    pub h_max: f64,
    pub h_min: Option<f64>,
    pub factor: f64,
}

impl GridOptions {
    /// `h_max, h_max / factor, ...` down to `h_min`; by default 15 steps.
    pub fn spacings(&self) -> anyhow::Result<Vec<f64>> {
        if !(self.h_max > 0.0 && self.factor > 1.0) {
            bail!("need --h-max > 0 and --h-factor > 1");
        }
        let h_min = self.h_min.unwrap_or(self.h_max * self.factor.powi(-14));
        if !(h_min > 0.0 && h_min <= self.h_max) {
            bail!("need 0 < --h-min <= --h-max");
        }
        let mut grid = Vec::new();
        let mut j = 0;
        loop {
            let h = self.h_max * self.factor.powi(-j);
            if h < h_min * (1.0 - 1e-12) {
                break;
            }
            grid.push(h);
            j += 1;
        }
        if grid.len() < 3 {
            bail!("the step grid has {} entries; a study needs at least 3", grid.len());
        }
        Ok(grid)
    }
}

pub fn study(
    ids: &[FormulaId],
    function: &TestFunction,
    x0: f64,
    grid: &GridOptions,
    csv_dir: &Path,
    gnuplot: bool,
) -> anyhow::Result<bool> {
    let spacings = grid.spacings()?;
    fs::create_dir_all(csv_dir).with_context(|| format!("creating {}", csv_dir.display()))?;
    let mut files = Vec::new();
    for id in ids {
        let stencil = id.stencil()?;
        let exact = function.derivative(stencil.m(), x0);
        let name = id.to_string();
        let report = convergence_study(&name, &stencil, |x| function.value(x), exact, x0, &spacings)?;
        let file = format!("{name}_{}.csv", function.file_stem());
        let path = csv_dir.join(&file);
        report
            .write_csv_file(&path)
            .with_context(|| format!("writing {}", path.display()))?;

        let fitted = report
            .fitted_order()
            .map_or_else(|| "n/a".to_string(), |q| format!("{q:.3}"));
        let floor = report
            .roundoff_floor_index
            .map_or_else(|| "not reached".to_string(), |i| format!("h={:e}", report.h[i]));
        println!(
            "{name:<6} {function} x0={x0}: fitted order {fitted} (claimed {}), floor {floor}, min error {:e} -> {}",
            id.order(),
            report.min_error(),
            path.display()
        );
        files.push((name, file));
    }
    if gnuplot {
        let path = csv_dir.join("plot.gp");
        fs::write(&path, gnuplot_script(function, &files)).with_context(|| format!("writing {}", path.display()))?;
        println!("plot script -> {}", path.display());
    }
    Ok(true)
}

fn gnuplot_script(function: &TestFunction, files: &[(String, String)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "set datafile separator ','");
    let _ = writeln!(out, "set logscale xy");
    let _ = writeln!(out, "set format xy '10^{{%L}}'");
    let _ = writeln!(out, "set xlabel 'h'");
    let _ = writeln!(out, "set ylabel 'absolute error'");
    let _ = writeln!(out, "set title 'derivative of {function}'");
    let _ = writeln!(out, "set key bottom right");
    let plots: Vec<String> = files
        .iter()
        .map(|(name, file)| format!("'{file}' using 1:2 skip 1 with linespoints title '{name}'"))
        .collect();
    let _ = writeln!(out, "plot {}", plots.join(", \\\n     "));
    out
}

pub fn verify_all(max_order: u32) -> anyhow::Result<bool> {
    let mut all = true;
    for id in FormulaId::all_up_to(max_order) {
        match id.stencil() {
            Ok(s) => {
                let report = verify(&s);
                all &= report.passed();
                let status = if report.passed() { "PASS" } else { "FAIL" };
                println!(
                    "{status} {:<6} {} p={} order={} nodes={} error_constant={}",
                    id.to_string(),
                    id.family,
                    id.p,
                    s.order(),
                    s.offsets().len(),
                    format_rational(s.error_constant())
                );
            }
            Err(e) => {
                all = false;
                println!("FAIL {:<6} {} p={}: {e}", id.to_string(), id.family, id.p);
            }
        }
    }
    Ok(all)
}
