#![allow(dead_code)]

pub mod ddouble;

use omf_coverage::SparsityModel;

pub const THETA_GRID: [f64; 7] = [0.01, 0.05, 0.1, 0.3, 0.5, 0.9, 1.0];

pub fn model(n: usize, theta: f64) -> SparsityModel {
    SparsityModel::new(n, theta).unwrap()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
