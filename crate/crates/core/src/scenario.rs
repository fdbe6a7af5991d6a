//! Node geometry, large-scale path loss and small-scale fading for the
//! Alan → {Bob, Eve, Rey} and Rey → {Bob, Eve} links.
//!
//! Direct links (Alan–Bob, Alan–Eve) are Rayleigh; the three links touching
//! the surface are Rician with a uniform-linear-array line-of-sight
//! component. Every realization is drawn from its own ChaCha stream, so a
//! `(seed, stream_index)` pair reproduces the same [`ChannelSet`].
//!
//! Draws are ordered `h_ab, h_ae`, then per element `(h_ar, h_rb, h_re)`, so
//! the first `n` elements of a larger surface coincide with a surface of `n`
//! elements drawn from the same stream.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SurveilError};

const LOS_MODULUS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Alan,
    Bob,
    Rey,
    Eve,
}

/// 2D positions in meters plus the orientation of Rey's element array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeLayout {
    pub alan: [f64; 2],
    pub bob: [f64; 2],
    pub rey: [f64; 2],
    pub eve: [f64; 2],
    pub rey_array_axis: [f64; 2],
}

impl Default for NodeLayout {
    fn default() -> Self {
        Self {
            alan: [0.0, 0.0],
            bob: [8.0, 0.0],
            rey: [7.0, 4.0],
            eve: [5.0, 0.0],
            rey_array_axis: [1.0, 0.0],
        }
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl NodeLayout {
    pub fn position(&self, node: Node) -> [f64; 2] {
        match node {
            Node::Alan => self.alan,
            Node::Bob => self.bob,
            Node::Rey => self.rey,
            Node::Eve => self.eve,
        }
    }

    pub fn distance(&self, a: Node, b: Node) -> f64 {
        dist(self.position(a), self.position(b))
    }

    pub fn validate(&self) -> Result<()> {
        let nodes = [Node::Alan, Node::Bob, Node::Rey, Node::Eve];
        for (i, a) in nodes.iter().enumerate() {
            for b in &nodes[i + 1..] {
                let d = self.distance(*a, *b);
                if !(d > 0.0 && d.is_finite()) {
                    return Err(SurveilError::Domain(format!(
                        "nodes {a:?} and {b:?} must be separated (distance {d})"
                    )));
                }
            }
        }
        let axis_norm = self.rey_array_axis[0].hypot(self.rey_array_axis[1]);
        if (axis_norm - 1.0).abs() > 1e-12 {
            return Err(SurveilError::Domain(format!(
                "rey_array_axis must have unit norm, got {axis_norm}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingParams {
    /// Path-loss exponent of Alan–Bob and Alan–Eve.
    pub exp_direct: f64,
    /// Path-loss exponent of the three links touching Rey.
    pub exp_ris: f64,
    /// Large-scale fading at 1 m, in dB.
    pub ref_loss_db: f64,
    /// Rician factor as a linear power ratio.
    pub rician_k: f64,
    /// Element spacing in wavelengths.
    pub element_spacing: f64,
}

impl Default for FadingParams {
    fn default() -> Self {
        Self {
            exp_direct: 3.5,
            exp_ris: 2.2,
            ref_loss_db: -30.0,
            rician_k: 5.0,
            element_spacing: 0.5,
        }
    }
}

impl FadingParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.exp_direct > 0.0
            && self.exp_ris > 0.0
            && self.rician_k >= 0.0
            && self.element_spacing > 0.0
            && self.ref_loss_db.is_finite();
        if ok {
            Ok(())
        } else {
            Err(SurveilError::Domain(format!("invalid fading parameters {self:?}")))
        }
    }
}

/// One realization of all five channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub h_ab: Complex64,
    pub h_ae: Complex64,
    /// Alan → Rey, one entry per element.
    pub h_ar: Vec<Complex64>,
    /// Rey → Bob.
    pub h_rb: Vec<Complex64>,
    /// Rey → Eve.
    pub h_re: Vec<Complex64>,
}

impl ChannelSet {
    pub fn n_elements(&self) -> usize {
        self.h_ar.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.h_ar.len();
        if n == 0 || self.h_rb.len() != n || self.h_re.len() != n {
            return Err(SurveilError::Domain(format!(
                "channel vector lengths differ: ar {}, rb {}, re {}",
                n,
                self.h_rb.len(),
                self.h_re.len()
            )));
        }
        let all = [self.h_ab, self.h_ae]
            .into_iter()
            .chain(self.h_ar.iter().copied())
            .chain(self.h_rb.iter().copied())
            .chain(self.h_re.iter().copied());
        for h in all {
            if !h.is_finite() {
                return Err(SurveilError::NonFinite("channel coefficient".into()));
            }
        }
        Ok(())
    }

    /// Eve's channels placed in Bob's slots (and vice versa).
    pub fn swapped(&self) -> Self {
        Self {
            h_ab: self.h_ae,
            h_ae: self.h_ab,
            h_ar: self.h_ar.clone(),
            h_rb: self.h_re.clone(),
            h_re: self.h_rb.clone(),
        }
    }
}

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Linear power gain `10^(ref_loss_db/10) · d^(−exponent)`.
pub fn path_loss_gain(distance: f64, exponent: f64, ref_loss_db: f64) -> Result<f64> {
    if !(distance > 0.0) || !distance.is_finite() {
        return Err(SurveilError::Domain(format!(
            "path loss needs a positive distance, got {distance}"
        )));
    }
    Ok(10f64.powf(ref_loss_db / 10.0) * distance.powf(-exponent))
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Line-of-sight array response of Rey toward `endpoint`:
/// entry `n` is `exp(j·2π·spacing·n·sinθ)` with θ measured from the array
/// normal.
pub fn los_steering(
    layout: &NodeLayout,
    endpoint: Node,
    n_elements: usize,
    spacing: f64,
) -> Result<Vec<Complex64>> {
    if endpoint == Node::Rey {
        return Err(SurveilError::Domain(
            "steering vector needs an endpoint other than Rey".into(),
        ));
    }
    if n_elements == 0 {
        return Err(SurveilError::Domain("steering vector needs at least one element".into()));
    }
    let rey = layout.rey;
    let p = layout.position(endpoint);
    let d = dist(rey, p);
    if !(d > 0.0) {
        return Err(SurveilError::Domain("endpoint coincides with Rey".into()));
    }
    let dir = [(p[0] - rey[0]) / d, (p[1] - rey[1]) / d];
    let axis = layout.rey_array_axis;
    // Projection on the array axis is the sine of the angle from the normal.
    let sin_theta = dir[0] * axis[0] + dir[1] * axis[1];
    Ok((0..n_elements)
        .map(|n| Complex64::from_polar(1.0, 2.0 * PI * spacing * n as f64 * sin_theta))
        .collect())
}

/// Standard circularly-symmetric complex Gaussian sample, `CN(0, 1)`.
pub fn standard_complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `√gain · g` for a given `CN(0,1)` sample `g`.
pub fn rayleigh_from(gain: f64, g: Complex64) -> Result<Complex64> {
    if !(gain >= 0.0) {
        return Err(SurveilError::Domain(format!("negative channel gain {gain}")));
    }
    Ok(g * gain.sqrt())
}

/// `√gain · (√(k/(1+k))·los + √(1/(1+k))·g)` for a given `CN(0,1)` sample.
pub fn rician_from(gain: f64, k: f64, los: Complex64, g: Complex64) -> Result<Complex64> {
    if !(gain >= 0.0) {
        return Err(SurveilError::Domain(format!("negative channel gain {gain}")));
    }
    if !(k >= 0.0) {
        return Err(SurveilError::Domain(format!("negative Rician factor {k}")));
    }
    if (los.norm() - 1.0).abs() > LOS_MODULUS_TOL {
        return Err(SurveilError::Domain(format!(
            "line-of-sight term must have unit modulus, got {}",
            los.norm()
        )));
    }
    let los_w = (k / (1.0 + k)).sqrt();
    let nlos_w = (1.0 / (1.0 + k)).sqrt();
    Ok((los * los_w + g * nlos_w) * gain.sqrt())
}

pub fn draw_rayleigh<R: Rng + ?Sized>(rng: &mut R, gain: f64) -> Result<Complex64> {
    let g = standard_complex_normal(rng);
    rayleigh_from(gain, g)
}

pub fn draw_rician<R: Rng + ?Sized>(
    rng: &mut R,
    gain: f64,
    k: f64,
    los: Complex64,
) -> Result<Complex64> {
    let g = standard_complex_normal(rng);
    rician_from(gain, k, los, g)
}

/// Average power gains of the five links for a layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGains {
    pub ab: f64,
    pub ae: f64,
    pub ar: f64,
    pub rb: f64,
    pub re: f64,
}

impl LinkGains {
    pub fn new(layout: &NodeLayout, fading: &FadingParams) -> Result<Self> {
        let pl = |a, b, exp| path_loss_gain(layout.distance(a, b), exp, fading.ref_loss_db);
        Ok(Self {
            ab: pl(Node::Alan, Node::Bob, fading.exp_direct)?,
            ae: pl(Node::Alan, Node::Eve, fading.exp_direct)?,
            ar: pl(Node::Alan, Node::Rey, fading.exp_ris)?,
            rb: pl(Node::Rey, Node::Bob, fading.exp_ris)?,
            re: pl(Node::Rey, Node::Eve, fading.exp_ris)?,
        })
    }
}

/// Builds a [`ChannelSet`] using `sample` for every `CN(0,1)` draw, in the
/// documented order. [`generate_channels`] feeds it a ChaCha stream.
pub fn generate_channels_with<F>(
    layout: &NodeLayout,
    fading: &FadingParams,
    n_r: usize,
    mut sample: F,
) -> Result<ChannelSet>
where
    F: FnMut() -> Complex64,
{
    if n_r == 0 {
        return Err(SurveilError::Domain("the surface needs at least one element".into()));
    }
    layout.validate()?;
    fading.validate()?;
    let gains = LinkGains::new(layout, fading)?;
    let spacing = fading.element_spacing;
    let a_ar = los_steering(layout, Node::Alan, n_r, spacing)?;
    let a_rb = los_steering(layout, Node::Bob, n_r, spacing)?;
    let a_re = los_steering(layout, Node::Eve, n_r, spacing)?;

    let h_ab = rayleigh_from(gains.ab, sample())?;
    let h_ae = rayleigh_from(gains.ae, sample())?;
    let k = fading.rician_k;
    let mut h_ar = Vec::with_capacity(n_r);
    let mut h_rb = Vec::with_capacity(n_r);
    let mut h_re = Vec::with_capacity(n_r);
    for n in 0..n_r {
        h_ar.push(rician_from(gains.ar, k, a_ar[n], sample())?);
        h_rb.push(rician_from(gains.rb, k, a_rb[n], sample())?);
        h_re.push(rician_from(gains.re, k, a_re[n], sample())?);
    }
    Ok(ChannelSet {
        h_ab,
        h_ae,
        h_ar,
        h_rb,
        h_re,
    })
}

pub fn generate_channels(
    layout: &NodeLayout,
    fading: &FadingParams,
    n_r: usize,
    stream: RngStream,
) -> Result<ChannelSet> {
    let mut rng = stream.rng();
    generate_channels_with(layout, fading, n_r, || standard_complex_normal(&mut rng))
}
