//! CSV emitters for figure data.
//!
//! Every emitter writes a header row, a fixed column order, and
//! fixed-precision floats, so repeated runs are byte-identical.

use std::io::{self, Write};

use crate::adversary::FlattenedTail;
use crate::curve::{CurveDistribution, DiscreteDistribution};
use crate::mechanism::DirectMechanism;

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

/// Support locus `(x, v_1..v_n)`: a dense grid refined with every kink
/// parameter, ending at the atom.
pub fn write_support_csv<W: Write>(
    w: &mut W,
    curve: &CurveDistribution,
    steps: usize,
) -> io::Result<()> {
    let n = curve.n();
    write!(w, "x")?;
    for i in 1..=n {
        write!(w, ",v{i}")?;
    }
    writeln!(w)?;
    let top = curve.top_parameter();
    let mut xs: Vec<f64> = (0..=steps)
        .map(|j| 1.0 + (top - 1.0) * j as f64 / steps as f64)
        .collect();
    xs.extend(curve.parameter_breakpoints());
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    for x in xs {
        write!(w, "{}", fmt(x))?;
        for v in curve.value_at(x) {
            write!(w, ",{}", fmt(v))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Price densities `(bundle, p, g)` for every sold bundle.
pub fn write_price_density_csv<W: Write>(
    w: &mut W,
    mech: &DirectMechanism,
    steps: usize,
) -> io::Result<()> {
    writeln!(w, "bundle,p,g")?;
    for (k, mb) in mech.menu.bundles.iter().enumerate() {
        let (lo, hi) = mb.price.support();
        for j in 0..=steps {
            let p = lo + (hi - lo) * j as f64 / steps as f64;
            writeln!(w, "{k},{},{}", fmt(p), fmt(mb.price.density(p)))?;
        }
    }
    Ok(())
}

/// Payment surface `(v1, v2, t)` on a grid; two-item instances only.
pub fn write_revenue_surface_csv<W: Write>(
    w: &mut W,
    mech: &DirectMechanism,
    maxima: (f64, f64),
    steps: usize,
) -> io::Result<()> {
    writeln!(w, "v1,v2,t")?;
    for j in 0..=steps {
        let v1 = maxima.0 * j as f64 / steps as f64;
        for l in 0..=steps {
            let v2 = maxima.1 * l as f64 / steps as f64;
            writeln!(
                w,
                "{},{},{}",
                fmt(v1),
                fmt(v2),
                fmt(mech.payment(&[v1, v2]))
            )?;
        }
    }
    Ok(())
}

/// Grand-bundle posted-price profit `(p, profit_worst_case,
/// profit_perturbed)` under the worst case and, when supplied, under the
/// flattened-tail deviation.
pub fn write_bundling_profit_csv<W: Write>(
    w: &mut W,
    curve: &CurveDistribution,
    perturbed: Option<&FlattenedTail>,
    steps: usize,
) -> io::Result<()> {
    if perturbed.is_some() {
        writeln!(w, "p,profit_worst_case,profit_perturbed")?;
    } else {
        writeln!(w, "p,profit_worst_case")?;
    }
    let hi = 1.2 * curve.grand_total_at(curve.top_parameter());
    let mut ps: Vec<f64> = (1..=steps).map(|j| hi * j as f64 / steps as f64).collect();
    ps.extend(
        curve
            .parameter_breakpoints()
            .iter()
            .map(|&x| curve.grand_total_at(x)),
    );
    if let Some(tail) = perturbed {
        ps.extend(tail.total_breakpoints());
    }
    ps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ps.dedup();
    for p in ps {
        if p <= 0.0 || p > hi {
            continue;
        }
        write!(w, "{},{}", fmt(p), fmt(p * curve.total_survival(p)))?;
        if let Some(tail) = perturbed {
            write!(w, ",{}", fmt(p * tail.total_survival(p)))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Finite-support distribution as `(v_1..v_n, weight)` rows.
pub fn write_discrete_csv<W: Write>(w: &mut W, dist: &DiscreteDistribution) -> io::Result<()> {
    let n = dist.n();
    for i in 1..=n {
        write!(w, "v{i}{}", if i == n { "" } else { "," })?;
    }
    writeln!(w, ",weight")?;
    for (p, weight) in dist.points.iter().zip(&dist.weights) {
        for v in p {
            write!(w, "{},", fmt(*v))?;
        }
        writeln!(w, "{}", fmt(*weight))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::Dispersion;
    use crate::mechanism::build_menu;
    use crate::saddle::{minimize_guarantee, AmbiguityProblem};

    fn setup() -> (CurveDistribution, DirectMechanism) {
        let p = AmbiguityProblem::with_point_moments(
            &[0.6, 0.5],
            &[vec![0], vec![1]],
            &[Dispersion::Quadratic, Dispersion::Quadratic],
            &[0.1, 0.1],
        );
        let sol = minimize_guarantee(&p).unwrap();
        let curve = CurveDistribution::from_solution(&sol);
        let mech = DirectMechanism::from_menu(build_menu(&sol));
        (curve, mech)
    }

    #[test]
    fn emitters_are_deterministic_with_headers() {
        let (curve, mech) = setup();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_support_csv(&mut a, &curve, 64).unwrap();
        write_support_csv(&mut b, &curve, 64).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("x,v1,v2\n"));

        let mut d = Vec::new();
        write_price_density_csv(&mut d, &mech, 32).unwrap();
        assert!(String::from_utf8(d).unwrap().starts_with("bundle,p,g\n"));
    }

    #[test]
    fn density_csv_ends_at_zero() {
        let (_, mech) = setup();
        let mut buf = Vec::new();
        write_price_density_csv(&mut buf, &mech, 16).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let last = text.lines().last().unwrap();
        let g: f64 = last.split(',').last().unwrap().parse().unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn support_csv_shows_the_vertical_segment() {
        let (curve, _) = setup();
        let mut buf = Vec::new();
        write_support_csv(&mut buf, &curve, 256).unwrap();
        let text = String::from_utf8(buf).unwrap();
        // Once item 1 caps, v1 stays at its maximum while v2 keeps rising.
        let (k, capped) = (0usize, curve.bundles[0].beta);
        let mut rising_after_cap = 0;
        let mut prev_v2 = 0.0;
        for line in text.lines().skip(1) {
            let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            let (v1, v2) = (cols[1], cols[2]);
            if (v1 - capped * curve.item_shares[k]).abs() < 1e-12 && v2 > prev_v2 {
                rising_after_cap += 1;
            }
            prev_v2 = v2;
        }
        assert!(rising_after_cap > 5);
    }
}
