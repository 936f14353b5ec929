//! Pointwise extrinsic geometry of a chart, computed from its jets.
//!
//! Frames are stored by their chart components E_i^a, so that e_i = E_i^a ∂_a.
//! Quantities carry jets whenever one more derivative is needed downstream.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::immersion::ImmersionChart;
use crate::kernel::{j_apply, j_apply_jets, Jet3, Signature};

/// Mean curvature below MINIMAL_TOL + MINIMAL_REL·|C| is treated as a minimal point;
/// the relative part absorbs integration noise on profiles with H ≡ 0.
pub const MINIMAL_TOL: f64 = 1e-10;
pub const MINIMAL_REL: f64 = 1e-6;
/// Smallest admissible eigenvalue of the induced metric.
pub const RANK_TOL: f64 = 1e-10;

/// Chart components of an orthonormal frame.
#[derive(Debug, Clone)]
pub struct Frame {
    pub comps: Vec<Vec<Jet3>>,
}

impl Frame {
    pub fn values(&self) -> Vec<Vec<f64>> {
        self.comps.iter().map(|e| e.iter().map(Jet3::value).collect()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Geometry {
    pub n: usize,
    pub sig: Signature,
    pub position: Vec<f64>,
    /// ∂_a X, order-2 jets.
    pub tangent: Vec<Vec<Jet3>>,
    /// ∂_a∂_b X, order-1 jets.
    pub hessian: Vec<Vec<Vec<Jet3>>>,
    /// g_ab, order-2 jets.
    pub metric: Vec<Vec<Jet3>>,
    /// C_abc = ⟨∂_a∂_b X, J∂_c X⟩, order-1 jets.
    pub cubic: Vec<Vec<Vec<Jet3>>>,
    metric_inv: DMatrix<f64>,
    min_eigenvalue: f64,
}

/// H-umbilical data read off in the adapted frame.
#[derive(Debug, Clone)]
pub struct ShapePattern {
    pub lambda: f64,
    pub mu: f64,
    /// Largest deviation of the cubic form from the H-umbilical template.
    pub off_pattern: f64,
    pub ratio_estimate: Option<f64>,
    pub mean_curvature: f64,
    /// e₁ fell back to the normalised ∂/∂s because |H| vanished.
    pub minimal: bool,
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub frame: Frame,
    pub pattern: ShapePattern,
    pub lambda: Jet3,
    pub mu: Jet3,
}

impl Geometry {
    pub fn at(chart: &ImmersionChart, p: &[f64]) -> Result<Self> {
        let n = chart.dim();
        let sig = chart.sig();
        let coords = chart.jets(p)?;
        let position: Vec<f64> = coords.iter().map(Jet3::value).collect();
        let tangent: Vec<Vec<Jet3>> = (0..n)
            .map(|a| coords.iter().map(|c| c.partial(a)).collect())
            .collect();
        let hessian: Vec<Vec<Vec<Jet3>>> = (0..n)
            .map(|a| (0..n).map(|b| tangent[a].iter().map(|c| c.partial(b)).collect()).collect())
            .collect();
        let metric: Vec<Vec<Jet3>> = (0..n)
            .map(|a| (0..n).map(|b| sig.dot_jets(&tangent[a], &tangent[b])).collect())
            .collect();
        let jt: Vec<Vec<Jet3>> = tangent.iter().map(|t| j_apply_jets(t)).collect();
        let cubic: Vec<Vec<Vec<Jet3>>> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| (0..n).map(|c| sig.dot_jets(&hessian[a][b], &jt[c])).collect())
                    .collect()
            })
            .collect();
        let g = DMatrix::from_fn(n, n, |a, b| metric[a][b].value());
        let min_eigenvalue = SymmetricEigen::new(g.clone())
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if !(min_eigenvalue > RANK_TOL) {
            return Err(Error::DegenerateChart(format!(
                "induced metric has eigenvalue {min_eigenvalue:e} at {p:?}"
            )));
        }
        let metric_inv = g
            .try_inverse()
            .ok_or_else(|| Error::DegenerateChart(format!("singular metric at {p:?}")))?;
        Ok(Geometry {
            n,
            sig,
            position,
            tangent,
            hessian,
            metric,
            cubic,
            metric_inv,
            min_eigenvalue,
        })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn metric_values(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |a, b| self.metric[a][b].value())
    }

    fn gdot(&self, v: &[Jet3], w: &[Jet3]) -> Jet3 {
        let mut acc = v[0].constant_like(0.0);
        for a in 0..self.n {
            let mut gw = v[0].constant_like(0.0);
            for b in 0..self.n {
                gw.add_product(&w[b], &self.metric[a][b]);
            }
            acc.add_product(&v[a], &gw);
        }
        acc
    }

    fn unit_axis(&self, a: usize) -> Vec<Jet3> {
        let like = &self.metric[0][0];
        (0..self.n).map(|b| like.constant_like(if a == b { 1.0 } else { 0.0 })).collect()
    }

    /// Gram–Schmidt of `seed` (if any) followed by the chart axes in `order`;
    /// axes nearly dependent on the vectors already taken are skipped.
    pub fn orthonormal_frame(&self, seed: Option<Vec<Jet3>>, order: &[usize]) -> Result<Frame> {
        let mut frame: Vec<Vec<Jet3>> = Vec::with_capacity(self.n);
        let push = |v: Vec<Jet3>, frame: &mut Vec<Vec<Jet3>>| -> Result<bool> {
            let mut w = v.clone();
            let before = self.gdot(&v, &v).value().sqrt();
            for e in frame.iter() {
                let c = self.gdot(&w, e);
                w = w.iter().zip(e).map(|(x, y)| x - &(&c * y)).collect();
            }
            let len2 = self.gdot(&w, &w);
            if !(len2.value().sqrt() > 1e-6 * before) {
                return Ok(false);
            }
            let inv = len2.sqrt()?.recip()?;
            frame.push(w.iter().map(|x| x * &inv).collect());
            Ok(true)
        };
        if let Some(v) = seed {
            if !push(v, &mut frame)? {
                return Err(Error::DegenerateChart("frame seed has zero length".into()));
            }
        }
        // drop the axis most aligned with the frame built so far when there is a seed
        let mut axes: Vec<usize> = order.to_vec();
        if !frame.is_empty() && axes.len() == self.n {
            let e1: Vec<f64> = frame[0].iter().map(Jet3::value).collect();
            let align = |a: usize| {
                let c: f64 = (0..self.n).map(|b| self.metric[a][b].value() * e1[b]).sum();
                c * c / self.metric[a][a].value()
            };
            let drop = (0..axes.len())
                .max_by(|&i, &j| align(axes[i]).total_cmp(&align(axes[j])))
                .expect("non-empty");
            axes.remove(drop);
        }
        for a in axes {
            if frame.len() == self.n {
                break;
            }
            push(self.unit_axis(a), &mut frame)?;
        }
        if frame.len() != self.n {
            return Err(Error::DegenerateChart("could not complete an orthonormal frame".into()));
        }
        Ok(Frame { comps: frame })
    }

    /// C(u, v, w) for chart-component vectors.
    pub fn cubic_form(&self, u: &[Jet3], v: &[Jet3], w: &[Jet3]) -> Jet3 {
        let mut acc = u[0].constant_like(0.0);
        for a in 0..self.n {
            let mut inner = u[0].constant_like(0.0);
            for b in 0..self.n {
                let mut row = u[0].constant_like(0.0);
                for c in 0..self.n {
                    row.add_product(&w[c], &self.cubic[a][b][c]);
                }
                inner.add_product(&v[b], &row);
            }
            acc.add_product(&u[a], &inner);
        }
        acc
    }

    /// Value of C(u, v, w), skipping the derivative bookkeeping.
    pub fn cubic_value(&self, u: &[f64], v: &[f64], w: &[f64]) -> f64 {
        let mut acc = 0.0;
        for a in 0..self.n {
            for b in 0..self.n {
                let uv = u[a] * v[b];
                for c in 0..self.n {
                    acc += uv * w[c] * self.cubic[a][b][c].value();
                }
            }
        }
        acc
    }

    /// Ambient vector E^a ∂_a X from chart components (values).
    pub fn push_forward(&self, comps: &[f64]) -> Vec<f64> {
        let m = self.tangent[0].len();
        (0..m)
            .map(|k| (0..self.n).map(|a| comps[a] * self.tangent[a][k].value()).sum())
            .collect()
    }

    /// max |⟨e_i, J e_j⟩| over an orthonormal frame.
    pub fn lagrangian_residual(&self, frame: &Frame) -> f64 {
        let vecs: Vec<Vec<f64>> = frame.values().iter().map(|c| self.push_forward(c)).collect();
        let mut worst = 0.0f64;
        for v in &vecs {
            let jv = j_apply(v);
            for w in &vecs {
                worst = worst.max(self.sig.dot(w, &jv).abs());
            }
        }
        worst
    }

    /// max |⟨e_i, e_j⟩ − δ_ij|.
    pub fn orthonormality_residual(&self, frame: &Frame) -> f64 {
        let vecs: Vec<Vec<f64>> = frame.values().iter().map(|c| self.push_forward(c)).collect();
        let mut worst = 0.0f64;
        for (i, v) in vecs.iter().enumerate() {
            for (j, w) in vecs.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.sig.dot(v, w) - target).abs());
            }
        }
        worst
    }

    /// |⟨ψ, ψ⟩ − level|.
    pub fn containment_residual(&self, level: f64) -> f64 {
        (self.sig.dot(&self.position, &self.position) - level).abs()
    }

    /// max |⟨e_i, iψ⟩| over an orthonormal frame.
    pub fn horizontality_residual(&self, frame: &Frame) -> f64 {
        let jpos = j_apply(&self.position);
        frame
            .values()
            .iter()
            .map(|c| self.sig.dot(&self.push_forward(c), &jpos).abs())
            .fold(0.0, f64::max)
    }

    /// Builds the adapted frame (e₁ ∥ JH with μ > 0) and reads off the pattern.
    ///
    /// `rotation`, when given, rotates the e₂…eₙ block by an (n−1)×(n−1) orthogonal matrix.
    pub fn extract(&self, rotation: Option<&DMatrix<f64>>) -> Result<Extraction> {
        let n = self.n;
        let order: Vec<usize> = (0..n).collect();
        let base = self.orthonormal_frame(None, &order)?;
        // t_k = Σ_i C(f_i, f_i, f_k) in the provisional frame; JH ∝ −Σ t_k f_k
        let zero = self.cubic[0][0][0].constant_like(0.0);
        let f = &base.comps;
        // trace against Σ_i f_i ⊗ f_i, then pair with each f_k
        let mut trace = vec![zero.clone(); n];
        for a in 0..n {
            for b in 0..n {
                let mut pair = zero.clone();
                for fi in f {
                    pair.add_product(&fi[a], &fi[b]);
                }
                for (c, tc) in trace.iter_mut().enumerate() {
                    tc.add_product(&pair, &self.cubic[a][b][c]);
                }
            }
        }
        let t: Vec<Jet3> = f
            .iter()
            .map(|fk| {
                let mut acc = zero.clone();
                for c in 0..n {
                    acc.add_product(&fk[c], &trace[c]);
                }
                acc
            })
            .collect();
        let t_norm = t.iter().map(|x| x.value() * x.value()).sum::<f64>().sqrt();
        let mean_curvature = t_norm / n as f64;
        let fv = base.values();
        let mut cubic_sq = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = self.cubic_value(&fv[i], &fv[j], &fv[k]);
                    cubic_sq += v * v;
                }
            }
        }
        let minimal = mean_curvature < MINIMAL_TOL + MINIMAL_REL * cubic_sq.sqrt();
        let seed: Vec<Jet3> = if minimal {
            self.unit_axis(0)
        } else {
            (0..n)
                .map(|a| {
                    let mut acc = t[0].constant_like(0.0);
                    for k in 0..n {
                        acc.add_product(&t[k], &base.comps[k][a]);
                    }
                    -acc
                })
                .collect()
        };
        let mut frame = self.orthonormal_frame(Some(seed), &order)?;

        let ev = frame.values();
        let lambda0 = self.cubic_value(&ev[0], &ev[0], &ev[0]);
        let mu0 = if n >= 2 { self.cubic_value(&ev[1], &ev[1], &ev[0]) } else { 0.0 };
        let flip = if mu0.abs() > 1e-12 { mu0 < 0.0 } else { lambda0 < 0.0 };
        if flip {
            frame.comps[0] = frame.comps[0].iter().map(|x| -x).collect();
        }
        let mut ext = self.read_off(frame, mean_curvature, minimal);
        if let Some(r) = rotation {
            ext = self.rotated(&ext, r)?;
        }
        Ok(ext)
    }

    /// Re-reads the pattern of `ext` after rotating its e₂…eₙ block by `r`.
    pub fn rotated(&self, ext: &Extraction, r: &DMatrix<f64>) -> Result<Extraction> {
        let n = self.n;
        let mut frame = ext.frame.clone();
        if r.nrows() != n - 1 || r.ncols() != n - 1 {
            return Err(Error::usage(format!("rotation must be {}×{}", n - 1, n - 1)));
        }
        let old = frame.comps.clone();
        for i in 1..n {
            frame.comps[i] = (0..n)
                .map(|a| {
                    let mut acc = old[1][a].scale(r[(i - 1, 0)]);
                    for j in 2..n {
                        acc = acc + old[j][a].scale(r[(i - 1, j - 1)]);
                    }
                    acc
                })
                .collect();
        }
        Ok(self.read_off(frame, ext.pattern.mean_curvature, ext.pattern.minimal))
    }

    fn read_off(&self, frame: Frame, mean_curvature: f64, minimal: bool) -> Extraction {
        let n = self.n;
        let e = &frame.comps;
        let lambda = self.cubic_form(&e[0], &e[0], &e[0]);
        let mu = self.cubic_form(&e[1], &e[1], &e[0]);
        let (lv, mv) = (lambda.value(), mu.value());
        let ev = frame.values();
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let c = self.cubic_value(&ev[i], &ev[j], &ev[k]);
                    let template = match (i, j, k) {
                        (0, 0, 0) => lv,
                        (0, a, b) if a == b => mv,
                        _ => 0.0,
                    };
                    off = off.max((c - template).abs());
                }
            }
        }
        let ratio_estimate = (mv.abs() > 1e-12).then(|| lv / mv);
        Extraction {
            frame,
            pattern: ShapePattern {
                lambda: lv,
                mu: mv,
                off_pattern: off,
                ratio_estimate,
                mean_curvature,
                minimal,
            },
            lambda,
            mu,
        }
    }

    /// Γ_{abd} = g(∇_{∂_a}∂_b, ∂_d), order-1 jets.
    pub fn christoffel(&self) -> Vec<Vec<Vec<Jet3>>> {
        let n = self.n;
        let dg = |a: usize, b: usize, c: usize| self.metric[a][b].partial(c);
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        (0..n)
                            .map(|d| (dg(b, d, a) + dg(a, d, b) - dg(a, b, d)).scale(0.5))
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// ω_ij(e_k) = ⟨∇_{e_k} e_i, e_j⟩ for all i, j, k.
    pub fn connection_forms(&self, frame: &Frame) -> Vec<Vec<Vec<f64>>> {
        let n = self.n;
        let gam = self.christoffel();
        let e = frame.values();
        let g = self.metric_values();
        // derivative of e_i along e_k, in chart components
        let de = |i: usize, k: usize| -> Vec<f64> {
            (0..n)
                .map(|a| (0..n).map(|b| e[k][b] * frame.comps[i][a].first(b)).sum())
                .collect()
        };
        let mut out = vec![vec![vec![0.0; n]; n]; n];
        for i in 0..n {
            for k in 0..n {
                let d = de(i, k);
                for j in 0..n {
                    let mut acc = 0.0;
                    for a in 0..n {
                        for dd in 0..n {
                            acc += d[a] * g[(a, dd)] * e[j][dd];
                        }
                    }
                    for b in 0..n {
                        for a in 0..n {
                            for dd in 0..n {
                                acc += e[k][b] * e[i][a] * e[j][dd] * gam[b][a][dd].value();
                            }
                        }
                    }
                    out[i][j][k] = acc;
                }
            }
        }
        out
    }

    /// Normal part of an ambient vector (complement of the tangent space).
    fn normal_part(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let dots: Vec<f64> = (0..n)
            .map(|a| {
                let t: Vec<f64> = self.tangent[a].iter().map(Jet3::value).collect();
                self.sig.dot(v, &t)
            })
            .collect();
        let mut out = v.to_vec();
        for c in 0..n {
            for d in 0..n {
                let coeff = self.metric_inv[(c, d)] * dots[c];
                for (o, t) in out.iter_mut().zip(&self.tangent[d]) {
                    *o -= coeff * t.value();
                }
            }
        }
        out
    }

    /// Second fundamental form h(∂_a, ∂_b) as ambient jets (flat ambient only).
    fn second_fundamental_jets(&self, frame: &Frame) -> Vec<Vec<Vec<Jet3>>> {
        let n = self.n;
        let m = self.tangent[0].len();
        // ambient frame vectors f_k = E_k^c ∂_c X, order-1 jets
        let fk: Vec<Vec<Jet3>> = frame
            .comps
            .iter()
            .map(|comp| {
                (0..m)
                    .map(|r| {
                        let mut acc = self.tangent[0][r].truncate(1).constant_like(0.0);
                        for c in 0..n {
                            acc.add_product(&comp[c], &self.tangent[c][r]);
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let v = &self.hessian[a][b];
                        let mut w = v.clone();
                        for f in &fk {
                            let c = -self.sig.dot_jets(v, f);
                            for (x, y) in w.iter_mut().zip(f) {
                                x.add_product(&c, y);
                            }
                        }
                        w
                    })
                    .collect()
            })
            .collect()
    }

    /// Components R_j of 4Σ_i A_{D_{e_i}τ} e_i + grad|τ|² in an orthonormal frame,
    /// together with grad|τ|² in the same frame.
    pub fn raw_bitension(&self, frame: &Frame) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.sig != Signature::Euclidean(self.n) {
            return Err(Error::NotSupported(
                "the raw bitension residual is implemented for the flat ambient only".into(),
            ));
        }
        let n = self.n;
        let h = self.second_fundamental_jets(frame);
        let e = frame.values();
        let m = self.tangent[0].len();
        // τ = Σ_i h(e_i, e_i) as jets
        let mut tau: Vec<Jet3> = (0..m).map(|_| h[0][0][0].constant_like(0.0)).collect();
        for a in 0..n {
            for b in 0..n {
                let mut w = h[0][0][0].constant_like(0.0);
                for comp in &frame.comps {
                    w.add_product(&comp[a], &comp[b]);
                }
                for r in 0..m {
                    tau[r].add_product(&w, &h[a][b][r]);
                }
            }
        }
        let tau_sq = self.sig.dot_jets(&tau, &tau);
        let hv = |i: usize, j: usize| -> Vec<f64> {
            (0..m)
                .map(|r| {
                    let mut acc = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            acc += e[i][a] * e[j][b] * h[a][b][r].value();
                        }
                    }
                    acc
                })
                .collect()
        };
        let d_tau: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let raw: Vec<f64> = (0..m)
                    .map(|r| (0..n).map(|c| e[i][c] * tau[r].first(c)).sum())
                    .collect();
                self.normal_part(&raw)
            })
            .collect();
        let grad: Vec<f64> = (0..n)
            .map(|j| (0..n).map(|c| e[j][c] * tau_sq.first(c)).sum())
            .collect();
        let residual = (0..n)
            .map(|j| {
                let shape: f64 = (0..n).map(|i| self.sig.dot(&hv(i, j), &d_tau[i])).sum();
                4.0 * shape + grad[j]
            })
            .collect();
        Ok((residual, grad))
    }

    /// max |⟨R(X,Y)Z,W⟩ − (⟨h(Y,Z),h(X,W)⟩ − ⟨h(X,Z),h(Y,W)⟩)| over frame vectors (flat ambient).
    pub fn gauss_residual(&self, frame: &Frame) -> Result<f64> {
        if self.sig != Signature::Euclidean(self.n) {
            return Err(Error::NotSupported("Gauss spot check is for the flat ambient".into()));
        }
        let n = self.n;
        let gam = self.christoffel();
        let gi = &self.metric_inv;
        let mut riem = vec![vec![vec![vec![0.0; n]; n]; n]; n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut v = gam[b][c][d].first(a) - gam[a][c][d].first(b);
                        for e in 0..n {
                            for f in 0..n {
                                v -= gi[(e, f)]
                                    * (gam[b][c][e].value() * gam[a][d][f].value()
                                        - gam[a][c][e].value() * gam[b][d][f].value());
                            }
                        }
                        riem[a][b][c][d] = v;
                    }
                }
            }
        }
        let hvals: Vec<Vec<Vec<f64>>> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let v: Vec<f64> = self.hessian[a][b].iter().map(Jet3::value).collect();
                        self.normal_part(&v)
                    })
                    .collect()
            })
            .collect();
        let hd = |a: usize, b: usize, c: usize, d: usize| self.sig.dot(&hvals[a][b], &hvals[c][d]);
        // R − (⟨h(b,c), h(a,d)⟩ − ⟨h(a,c), h(b,d)⟩) in chart indices, flattened
        let idx = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
        let mut diff = vec![0.0; n * n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        diff[idx(a, b, c, d)] = riem[a][b][c][d] - (hd(b, c, a, d) - hd(a, c, b, d));
                    }
                }
            }
        }
        // move to the frame one slot at a time
        let e = frame.values();
        for slot in 0..4 {
            let stride = n.pow(3 - slot as u32);
            let mut next = vec![0.0; diff.len()];
            for (pos, out) in next.iter_mut().enumerate() {
                let i = (pos / stride) % n;
                let base = pos - i * stride;
                *out = (0..n).map(|a| e[i][a] * diff[base + a * stride]).sum();
            }
            diff = next;
        }
        let worst = diff.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(worst)
    }
}

/// Directional derivative of a jet along chart components.
pub fn along(f: &Jet3, comps: &[f64]) -> f64 {
    f.directional(comps)
}
