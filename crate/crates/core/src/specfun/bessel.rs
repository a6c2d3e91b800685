//! Modified Bessel functions of the first kind, orders 0 and 1.
//!
//! Both are evaluated in exponentially scaled form e^{-x}·Iₙ(x): the power
//! series below x = 30 (all terms positive, no cancellation), the Hankel
//! asymptotic series above it.

use serde::{Deserialize, Serialize};

const SERIES_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BesselOrder {
    Zero,
    One,
}

impl BesselOrder {
    fn nu(self) -> f64 {
        match self {
            BesselOrder::Zero => 0.0,
            BesselOrder::One => 1.0,
        }
    }
}

/// Iₙ(x) for n ∈ {0, 1}. Overflows to infinity above x ≈ 713.
pub fn bessel_i(order: BesselOrder, x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < SERIES_LIMIT {
        power_series(order, ax)
    } else {
        bessel_i_scaled(order, ax) * ax.exp()
    };
    match order {
        BesselOrder::One if x < 0.0 => -v,
        _ => v,
    }
}

/// e^{-|x|}·Iₙ(x), finite for all x.
pub fn bessel_i_scaled(order: BesselOrder, x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < SERIES_LIMIT {
        power_series(order, ax) * (-ax).exp()
    } else {
        asymptotic_scaled(order, ax)
    };
    match order {
        BesselOrder::One if x < 0.0 => -v,
        _ => v,
    }
}

pub fn i0(x: f64) -> f64 {
    bessel_i(BesselOrder::Zero, x)
}

pub fn i1(x: f64) -> f64 {
    bessel_i(BesselOrder::One, x)
}

pub fn i0e(x: f64) -> f64 {
    bessel_i_scaled(BesselOrder::Zero, x)
}

pub fn i1e(x: f64) -> f64 {
    bessel_i_scaled(BesselOrder::One, x)
}

fn power_series(order: BesselOrder, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let (mut term, shift) = match order {
        BesselOrder::Zero => (1.0, 0.0),
        BesselOrder::One => (0.5 * x, 1.0),
    };
    let mut sum = term;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= q / (m * (m + shift));
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    sum
}

fn asymptotic_scaled(order: BesselOrder, x: f64) -> f64 {
    let mu = 4.0 * order.nu() * order.nu();
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..100 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= -(mu - odd * odd) / (kf * 8.0 * x);
        if term.abs() >= prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}
