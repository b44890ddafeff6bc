//! Random environments: Bernoulli weights on `[0..m] x [0..n]`.
//!
//! Weights live in one flat row-major array (`j` outer, `i` inner). The south
//! axis is row 0, the west axis is column 0. Sampling always draws one uniform
//! per site in storage order, origin included, so that
//! `sample_environment` and `realize(sample_uniform_field(..))` consume the
//! generator identically.

use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{bernoulli, uniform};

/// West boundary parameter `l(u) = p(1-u) / (u + p(1-u))`.
pub fn west_parameter(p: f64, u: f64) -> f64 {
    let q = p * (1.0 - u);
    q / (u + q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    p: f64,
    u: f64,
}

impl Params {
    pub fn new(p: f64, u: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Param(format!("p = {p} must lie in (0,1)")));
        }
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::Param(format!("u = {u} must lie in (0,1]")));
        }
        Ok(Params { p, u })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn west(&self) -> f64 {
        west_parameter(self.p, self.u)
    }

    pub fn law(&self) -> Law {
        Law {
            south: self.u,
            west: self.west(),
            bulk: self.p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub m: usize,
    pub n: usize,
}

impl Dims {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Dims { m, n });
        }
        Ok(Dims { m, n })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.m + 1
    }

    #[inline]
    pub fn len(&self) -> usize {
        (self.m + 1) * (self.n + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.m && j <= self.n);
        j * (self.m + 1) + i
    }

    pub fn transposed(&self) -> Dims {
        Dims { m: self.n, n: self.m }
    }
}

/// Success probabilities of the three regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Law {
    pub south: f64,
    pub west: f64,
    pub bulk: f64,
}

impl Law {
    pub fn bulk_only(p: f64) -> Law {
        Law {
            south: 0.0,
            west: 0.0,
            bulk: p,
        }
    }

    #[inline]
    pub fn threshold(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => 0.0,
            (_, 0) => self.south,
            (0, _) => self.west,
            _ => self.bulk,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tag {
    Boundary,
    BulkOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformField {
    dims: Dims,
    values: Vec<f64>,
}

impl UniformField {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.dims.index(i, j)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Build from explicit values; every entry must lie in [0,1).
    pub fn from_values(dims: Dims, values: Vec<f64>) -> Result<Self> {
        if values.len() != dims.len() {
            return Err(Error::Param(format!(
                "expected {} uniforms, got {}",
                dims.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !(0.0..1.0).contains(v)) {
            return Err(Error::Param("uniform values must lie in [0,1)".into()));
        }
        Ok(UniformField { dims, values })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    dims: Dims,
    weights: Vec<u8>,
    tag: Tag,
    law: Law,
    params: Option<Params>,
}

impl Environment {
    /// Environment with weights given by `f(i, j)`; the origin is forced to 0.
    /// Tagged as a boundary model without recorded parameters.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut weights = vec![0u8; dims.len()];
        for j in 0..=dims.n {
            for i in 0..=dims.m {
                if (i, j) != (0, 0) {
                    weights[dims.index(i, j)] = f(i, j) as u8;
                }
            }
        }
        Environment {
            dims,
            weights,
            tag: Tag::Boundary,
            law: Law {
                south: f64::NAN,
                west: f64::NAN,
                bulk: f64::NAN,
            },
            params: None,
        }
    }

    /// Same weights, tagged as bulk-only; axis weights are cleared.
    pub fn into_bulk_only(mut self) -> Self {
        let d = self.dims;
        for i in 0..=d.m {
            self.weights[d.index(i, 0)] = 0;
        }
        for j in 0..=d.n {
            self.weights[d.index(0, j)] = 0;
        }
        self.tag = Tag::BulkOnly;
        self.law.south = 0.0;
        self.law.west = 0.0;
        self.params = None;
        self
    }

    pub fn with_params(mut self, params: Params) -> Self {
        self.law = params.law();
        self.params = Some(params);
        self
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn tag(&self) -> Tag {
        self.tag
    }

    pub fn law(&self) -> Law {
        self.law
    }

    pub fn params(&self) -> Option<Params> {
        self.params
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> u8 {
        self.weights[self.dims.index(i, j)]
    }

    pub fn weights(&self) -> &[u8] {
        &self.weights
    }

    pub fn south(&self) -> Vec<u8> {
        (1..=self.dims.m).map(|i| self.weight(i, 0)).collect()
    }

    pub fn west(&self) -> Vec<u8> {
        (1..=self.dims.n).map(|j| self.weight(0, j)).collect()
    }

    /// Copy with one weight changed (origin stays 0).
    pub fn with_weight(&self, i: usize, j: usize, w: bool) -> Self {
        let mut e = self.clone();
        if (i, j) != (0, 0) {
            e.weights[e.dims.index(i, j)] = w as u8;
        }
        e.params = None;
        e
    }

    /// Copy with the west axis set to zero.
    pub fn west_zeroed(&self) -> Self {
        let mut e = self.clone();
        for j in 1..=e.dims.n {
            e.weights[e.dims.index(0, j)] = 0;
        }
        e.law.west = 0.0;
        e.params = None;
        e
    }

    /// Copy with the south axis set to zero.
    pub fn south_zeroed(&self) -> Self {
        let mut e = self.clone();
        for i in 1..=e.dims.m {
            e.weights[e.dims.index(i, 0)] = 0;
        }
        e.law.south = 0.0;
        e.params = None;
        e
    }
}

fn draw_with_law<R: RngCore + ?Sized>(dims: Dims, law: Law, rng: &mut R) -> Vec<u8> {
    let mut weights = Vec::with_capacity(dims.len());
    for j in 0..=dims.n {
        for i in 0..=dims.m {
            weights.push(bernoulli(rng, law.threshold(i, j)) as u8);
        }
    }
    weights
}

pub fn sample_environment<R: RngCore + ?Sized>(params: Params, dims: Dims, rng: &mut R) -> Environment {
    let law = params.law();
    Environment {
        dims,
        weights: draw_with_law(dims, law, rng),
        tag: Tag::Boundary,
        law,
        params: Some(params),
    }
}

/// Non-boundary model: Ber(p) in the bulk, zero axes.
pub fn sample_bulk_environment<R: RngCore + ?Sized>(p: f64, dims: Dims, rng: &mut R) -> Result<Environment> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Param(format!("p = {p} must lie in (0,1)")));
    }
    let law = Law::bulk_only(p);
    Ok(Environment {
        dims,
        weights: draw_with_law(dims, law, rng),
        tag: Tag::BulkOnly,
        law,
        params: None,
    })
}

pub fn sample_uniform_field<R: RngCore + ?Sized>(dims: Dims, rng: &mut R) -> UniformField {
    let values = (0..dims.len()).map(|_| uniform(rng)).collect();
    UniformField { dims, values }
}

pub fn realize(field: &UniformField, params: Params) -> Environment {
    let law = params.law();
    Environment {
        dims: field.dims,
        weights: realize_weights(field, law),
        tag: Tag::Boundary,
        law,
        params: Some(params),
    }
}

pub fn realize_bulk(field: &UniformField, p: f64) -> Environment {
    let law = Law::bulk_only(p);
    Environment {
        dims: field.dims,
        weights: realize_weights(field, law),
        tag: Tag::BulkOnly,
        law,
        params: None,
    }
}

fn realize_weights(field: &UniformField, law: Law) -> Vec<u8> {
    let d = field.dims;
    let mut w = Vec::with_capacity(d.len());
    for j in 0..=d.n {
        for i in 0..=d.m {
            w.push((field.values[d.index(i, j)] < law.threshold(i, j)) as u8);
        }
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    South,
    West,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub epsilon: f64,
    pub side: Side,
}

impl PerturbationSpec {
    pub fn south(epsilon: f64) -> Self {
        PerturbationSpec {
            epsilon,
            side: Side::South,
        }
    }

    pub fn west(epsilon: f64) -> Self {
        PerturbationSpec {
            epsilon,
            side: Side::West,
        }
    }

    /// Success probability of the auxiliary variable for this side:
    /// `eps/(1-u)` for the south, `l(u+eps)/l(u)` for the west.
    pub fn auxiliary_probability(&self, params: Params) -> Result<f64> {
        let (p, u, e) = (params.p(), params.u(), self.epsilon);
        if e.is_nan() || e <= 0.0 {
            return Err(Error::Param(format!("epsilon = {e} must be positive")));
        }
        if (u + e).is_nan() || u + e >= 1.0 {
            return Err(Error::Param(format!("u + epsilon = {} must be < 1", u + e)));
        }
        let q = match self.side {
            Side::South => e / (1.0 - u),
            Side::West => 1.0 - e / ((1.0 - u) * (p + u * (1.0 - p) + (1.0 - p) * e)),
        };
        let ok = match self.side {
            Side::South => q > 0.0 && q <= 1.0,
            Side::West => (0.0..=1.0).contains(&q),
        };
        if !ok {
            return Err(Error::Param(format!(
                "epsilon = {e} gives auxiliary probability {q} outside the unit interval"
            )));
        }
        Ok(q)
    }
}

fn recorded_params(env: &Environment) -> Result<Params> {
    match (env.tag, env.params) {
        (Tag::Boundary, Some(p)) => Ok(p),
        _ => Err(Error::Param(
            "perturbation needs a boundary-model environment with recorded parameters".into(),
        )),
    }
}

/// South axis becomes `H_i OR w_{i,0}` with `H_i ~ Ber(eps/(1-u))`, giving
/// Ber(u + eps) marginals.
pub fn perturb_south<R: RngCore + ?Sized>(
    env: &Environment,
    spec: PerturbationSpec,
    rng: &mut R,
) -> Result<Environment> {
    if spec.side != Side::South {
        return Err(Error::Param("perturb_south called with a west spec".into()));
    }
    let params = recorded_params(env)?;
    let h = spec.auxiliary_probability(params)?;
    let mut out = env.clone();
    for i in 1..=env.dims.m {
        let k = env.dims.index(i, 0);
        out.weights[k] |= bernoulli(rng, h) as u8;
    }
    out.law.south = params.u() + spec.epsilon;
    out.params = None;
    Ok(out)
}

/// West axis becomes `w_{0,j} * V_j` with `V_j ~ Ber(l(u+eps)/l(u))`, giving
/// Ber(l(u + eps)) marginals.
pub fn perturb_west<R: RngCore + ?Sized>(
    env: &Environment,
    spec: PerturbationSpec,
    rng: &mut R,
) -> Result<Environment> {
    if spec.side != Side::West {
        return Err(Error::Param("perturb_west called with a south spec".into()));
    }
    let params = recorded_params(env)?;
    let v = spec.auxiliary_probability(params)?;
    let mut out = env.clone();
    for j in 1..=env.dims.n {
        let k = env.dims.index(0, j);
        out.weights[k] &= bernoulli(rng, v) as u8;
    }
    out.law.west = west_parameter(params.p(), params.u() + spec.epsilon);
    out.params = None;
    Ok(out)
}

/// `w~_{i,j} = w_{j,i}`; south and west swap roles.
pub fn transpose(env: &Environment) -> Environment {
    let d = env.dims;
    let t = d.transposed();
    let mut weights = vec![0u8; t.len()];
    for j in 0..=t.n {
        for i in 0..=t.m {
            weights[t.index(i, j)] = env.weight(j, i);
        }
    }
    Environment {
        dims: t,
        weights,
        tag: env.tag,
        law: Law {
            south: env.law.west,
            west: env.law.south,
            bulk: env.law.bulk,
        },
        params: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Stream};

    fn rng(k: u64) -> crate::rng::SampleRng {
        substream(42, Stream::Environment, k)
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(0.0, 0.5).is_err());
        assert!(Params::new(1.0, 0.5).is_err());
        assert!(Params::new(0.5, 0.0).is_err());
        assert!(Params::new(0.5, 1.01).is_err());
        assert!(Params::new(0.5, f64::NAN).is_err());
        assert_eq!(Params::new(0.3, 1.0).unwrap().west(), 0.0);
    }

    #[test]
    fn sampling_matches_realize_on_same_stream() {
        let params = Params::new(0.4, 0.3).unwrap();
        let dims = Dims::new(7, 5).unwrap();
        let a = sample_environment(params, dims, &mut rng(1));
        let f = sample_uniform_field(dims, &mut rng(1));
        assert_eq!(a, realize(&f, params));
    }

    #[test]
    fn origin_is_zero_and_u_one_is_degenerate() {
        let params = Params::new(0.5, 1.0).unwrap();
        let dims = Dims::new(6, 6).unwrap();
        for k in 0..20 {
            let e = sample_environment(params, dims, &mut rng(k));
            assert_eq!(e.weight(0, 0), 0);
            assert!(e.south().iter().all(|&w| w == 1));
            assert!(e.west().iter().all(|&w| w == 0));
        }
    }

    #[test]
    fn realize_all_high_uniforms_gives_zero_environment() {
        let dims = Dims::new(3, 4).unwrap();
        let f = UniformField::from_values(dims, vec![0.99; dims.len()]).unwrap();
        let e = realize(&f, Params::new(0.5, 0.5).unwrap());
        assert!(e.weights().iter().all(|&w| w == 0));
    }

    #[test]
    fn transpose_is_an_involution() {
        let params = Params::new(0.5, 0.3).unwrap();
        let e = sample_environment(params, Dims::new(4, 7).unwrap(), &mut rng(3));
        let t = transpose(&e);
        assert_eq!(t.south(), e.west());
        assert_eq!(t.west(), e.south());
        let back = transpose(&t);
        assert_eq!(back.weights(), e.weights());
        assert_eq!(back.dims(), e.dims());
    }

    #[test]
    fn perturbation_validation() {
        let params = Params::new(0.5, 0.5).unwrap();
        let e = sample_environment(params, Dims::new(3, 3).unwrap(), &mut rng(0));
        assert!(perturb_south(&e, PerturbationSpec::south(0.6), &mut rng(1)).is_err());
        assert!(perturb_south(&e, PerturbationSpec::south(-0.1), &mut rng(1)).is_err());
        assert!(perturb_south(&e, PerturbationSpec::west(0.1), &mut rng(1)).is_err());
        assert!(perturb_west(&e, PerturbationSpec::west(0.6), &mut rng(1)).is_err());
        let derived = transpose(&e);
        assert!(perturb_south(&derived, PerturbationSpec::south(0.1), &mut rng(1)).is_err());
    }

    #[test]
    fn west_auxiliary_probability_matches_ratio() {
        let params = Params::new(0.5, 0.5).unwrap();
        let v = PerturbationSpec::west(0.05).auxiliary_probability(params).unwrap();
        let ratio = west_parameter(0.5, 0.55) / west_parameter(0.5, 0.5);
        assert!((v - ratio).abs() < 1e-15);
    }
}
