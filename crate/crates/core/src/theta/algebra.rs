use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lines::Tracer;
use super::{Result, ThetaError};
use crate::arith::{self, Rat};
use crate::geometry::AffineManifold;
use crate::scattering::ScatteringDiagram;
use crate::series::{Context, TruncatedSeries};

/// Sorted inputs and the target.
pub type TableKey = (Vec<Vec<i64>>, Vec<i64>);

/// A module element `Σ c_P θ_P` with coefficients in the truncated class ring.
pub type Element = BTreeMap<Vec<i64>, TruncatedSeries>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraOptions {
    /// L∞ bound on basis points.
    pub bound: i64,
    /// Independent basepoints per structure constant; they must all agree.
    pub samples: usize,
    pub seed: u64,
    /// Fail when a product of basis elements needs a point outside the bound.
    pub strict: bool,
}

impl Default for AlgebraOptions {
    fn default() -> Self {
        AlgebraOptions {
            bound: 2,
            samples: 2,
            seed: 0,
            strict: false,
        }
    }
}

/// Integer points of the support with L∞ norm at most `bound`, including 0.
pub fn support_points(am: &AffineManifold, bound: i64) -> Vec<Vec<i64>> {
    let mut out = vec![];
    for a in -bound..=bound {
        for b in -bound..=bound {
            let p = vec![a, b];
            if am.locate(&arith::rat_vec(&p)).is_ok() {
                out.push(p);
            }
        }
    }
    out
}

/// Binary structure constants of basis elements, plus the unit rule for θ_0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub order: u32,
    pub generators: Vec<String>,
    pub bound: i64,
    pub basis: Vec<Vec<i64>>,
    /// Nonzero entries only.
    pub entries: BTreeMap<TableKey, TruncatedSeries>,
}

impl Table {
    pub fn key(inputs: &[Vec<i64>], q: &[i64]) -> TableKey {
        let mut ins = inputs.to_vec();
        ins.sort();
        (ins, q.to_vec())
    }

    pub fn get(&self, inputs: &[Vec<i64>], q: &[i64]) -> Option<&TruncatedSeries> {
        self.entries.get(&Table::key(inputs, q))
    }

    /// Constant terms of the entries, i.e. the table modulo the curve-class ideal.
    pub fn mod_classes(&self) -> BTreeMap<TableKey, BigInt> {
        self.entries
            .iter()
            .filter_map(|(k, v)| {
                let c = v.constant_term();
                (!c.is_zero()).then(|| (k.clone(), c))
            })
            .collect()
    }

    /// Largest norm of a target with a nonzero entry.
    pub fn needed_bound(&self) -> i64 {
        self.entries.keys().map(|(_, q)| arith::linf(q)).max().unwrap_or(0)
    }
}

type ThetaKey = (Vec<i64>, usize, usize, Vec<i64>);

/// Theta-basis algebra of a consistent diagram, computed lazily with caching.
pub struct MirrorAlgebra {
    diagram: Arc<ScatteringDiagram>,
    tracer: Tracer,
    options: AlgebraOptions,
    basis: Vec<Vec<i64>>,
    coeff: Arc<Context>,
    scale: Rat,
    thetas: Mutex<HashMap<ThetaKey, std::result::Result<TruncatedSeries, ThetaError>>>,
    chis: Mutex<HashMap<TableKey, TruncatedSeries>>,
    products: Mutex<HashMap<Vec<Vec<i64>>, Element>>,
}

impl MirrorAlgebra {
    pub fn new(diagram: ScatteringDiagram, options: AlgebraOptions) -> Result<MirrorAlgebra> {
        if options.samples == 0 {
            return Err(ThetaError::Input("at least one basepoint sample is needed".into()));
        }
        let basis = support_points(&diagram.ambient, options.bound);
        let coeff = diagram.ctx.with_rank(0);
        // push basepoints beyond every apex and joint
        let mut far = Rat::zero();
        for p in diagram.walls.iter().map(|w| w.apex.clone()).chain(diagram.joints()) {
            for x in p {
                if x.abs() > far {
                    far = x.abs();
                }
            }
        }
        let scale = Rat::one() + far * Rat::from_integer(2.into());
        let diagram = Arc::new(diagram);
        Ok(MirrorAlgebra {
            tracer: Tracer::shared(diagram.clone()),
            diagram,
            options,
            basis,
            coeff,
            scale,
            thetas: Mutex::new(HashMap::new()),
            chis: Mutex::new(HashMap::new()),
            products: Mutex::new(HashMap::new()),
        })
    }

    pub fn diagram(&self) -> &ScatteringDiagram {
        &self.diagram
    }

    pub fn options(&self) -> &AlgebraOptions {
        &self.options
    }

    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    pub fn coefficient_context(&self) -> &Arc<Context> {
        &self.coeff
    }

    fn in_support(&self, p: &[i64]) -> bool {
        self.diagram.ambient.locate(&arith::rat_vec(p)).is_ok()
    }

    /// Generic basepoint near `q`: a large multiple of `q` pushed slightly into a maximal
    /// cone containing it.
    pub fn basepoint(&self, q: &[i64], sample: usize, attempt: usize) -> Result<Vec<Rat>> {
        let am = &self.diagram.ambient;
        let cones = if q.iter().all(|x| *x == 0) {
            (0..am.fan.maximal_cones.len()).collect()
        } else {
            am.locate(&arith::rat_vec(q))
                .map_err(|_| ThetaError::OutsideSupport(q.to_vec()))?
                .maximal
        };
        let mut rng = ChaCha8Rng::seed_from_u64(arith::mix_seed(
            self.options.seed,
            &[q[0], q[1], sample as i64, attempt as i64],
        ));
        let c = cones[rng.gen_range(0..cones.len())];
        let eps = Rat::new(BigInt::one(), BigInt::from(10_000));
        let mut z: Vec<Rat> = q.iter().map(|x| &self.scale * Rat::from_integer((*x).into())).collect();
        for &r in &am.fan.maximal_cones[c] {
            let den: i64 = rng.gen_range(1_000_000_007..2_000_000_000);
            let num: i64 = rng.gen_range(1..den);
            let coef = &eps * Rat::new(num.into(), den.into());
            for (zi, ri) in z.iter_mut().zip(&am.fan.rays[r]) {
                *zi += &coef * Rat::from_integer((*ri).into());
            }
        }
        Ok(z)
    }

    fn theta_at(&self, q: &[i64], sample: usize, attempt: usize, p: &[i64]) -> Result<TruncatedSeries> {
        let key = (q.to_vec(), sample, attempt, p.to_vec());
        if let Some(v) = self.thetas.lock().expect("theta cache").get(&key) {
            return v.clone();
        }
        let z = self.basepoint(q, sample, attempt)?;
        let v = self.tracer.theta(p, &z).map(|(_, s)| s);
        self.thetas.lock().expect("theta cache").insert(key, v.clone());
        v
    }

    fn chi_sample(&self, inputs: &[Vec<i64>], q: &[i64], sample: usize) -> Result<TruncatedSeries> {
        let mut last = None;
        for attempt in 0..8 {
            let mut prod = TruncatedSeries::one(&self.diagram.ctx);
            let mut degenerate = None;
            for p in inputs {
                match self.theta_at(q, sample, attempt, p) {
                    Ok(th) => prod = prod.mul(&th)?,
                    Err(e @ ThetaError::NonGeneric(_)) => {
                        degenerate = Some(e);
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            match degenerate {
                None => return Ok(prod.coefficient_of_character(q).recontext(&self.coeff)?),
                Some(e) => last = Some(e),
            }
        }
        let _ = last;
        Err(ThetaError::NoBasepoint(q.to_vec()))
    }

    /// `χ(P_1, ..., P_n, Q)` from n-tuples of broken lines at several basepoints near `Q`.
    pub fn structure_constant(&self, inputs: &[Vec<i64>], q: &[i64]) -> Result<TruncatedSeries> {
        let key = Table::key(inputs, q);
        if let Some(v) = self.chis.lock().expect("chi cache").get(&key) {
            return Ok(v.clone());
        }
        let nonzero: Vec<Vec<i64>> = key.0.iter().filter(|p| p.iter().any(|x| *x != 0)).cloned().collect();
        let value = if !self.in_support(q) {
            TruncatedSeries::zero(&self.coeff)
        } else if nonzero.is_empty() {
            if q.iter().all(|x| *x == 0) {
                TruncatedSeries::one(&self.coeff)
            } else {
                TruncatedSeries::zero(&self.coeff)
            }
        } else {
            let vals: Vec<TruncatedSeries> = (0..self.options.samples)
                .map(|s| self.chi_sample(&nonzero, q, s))
                .collect::<Result<_>>()?;
            if vals.iter().any(|v| *v != vals[0]) {
                let names = &self.diagram.monoid.generators;
                return Err(ThetaError::Unstable {
                    inputs: key.0.clone(),
                    target: q.to_vec(),
                    values: vals.iter().map(|v| v.display_with(names).to_string()).collect(),
                });
            }
            vals.into_iter().next().expect("samples > 0")
        };
        self.chis.lock().expect("chi cache").insert(key, value.clone());
        Ok(value)
    }

    /// Targets that can carry a nonzero structure constant for these inputs.
    pub fn candidate_targets(&self, inputs: &[Vec<i64>]) -> Vec<Vec<i64>> {
        let nonzero: Vec<&Vec<i64>> = inputs.iter().filter(|p| p.iter().any(|x| *x != 0)).collect();
        if nonzero.is_empty() {
            return vec![vec![0, 0]];
        }
        let tracer = &self.tracer;
        let mut out: Vec<Vec<i64>> = if self.diagram.ambient.is_toric() {
            let shifts = tracer.final_offsets();
            let mut sums = vec![vec![0i64, 0]];
            for p in &nonzero {
                let mut next = vec![];
                for s in &sums {
                    for a in &shifts {
                        next.push(arith::add(&arith::add(s, p), a));
                    }
                }
                next.sort();
                next.dedup();
                sums = next;
            }
            sums
        } else {
            let norm: i64 = nonzero.iter().map(|p| arith::linf(p)).sum();
            let r = tracer.box_radius(norm) * nonzero.len() as i64;
            let mut v = vec![];
            for a in -r..=r {
                for b in -r..=r {
                    v.push(vec![a, b]);
                }
            }
            v
        };
        out.retain(|q| self.in_support(q));
        out
    }

    /// `θ_{P_1} ⋯ θ_{P_n}` expanded in the theta basis.
    pub fn multiply_points(&self, inputs: &[Vec<i64>]) -> Result<Element> {
        let mut key = inputs.to_vec();
        key.sort();
        if let Some(v) = self.products.lock().expect("product cache").get(&key) {
            return Ok(v.clone());
        }
        let mut out = Element::new();
        for q in self.candidate_targets(&key) {
            let c = self.structure_constant(&key, &q)?;
            if !c.is_zero() {
                out.insert(q, c);
            }
        }
        self.products.lock().expect("product cache").insert(key, out.clone());
        Ok(out)
    }

    pub fn multiply(&self, p1: &[i64], p2: &[i64]) -> Result<Element> {
        self.multiply_points(&[p1.to_vec(), p2.to_vec()])
    }

    /// Product of two module elements.
    pub fn multiply_elements(&self, a: &Element, b: &Element) -> Result<Element> {
        let mut out = Element::new();
        for (p, ca) in a {
            for (r, cb) in b {
                let c = ca.mul(cb)?;
                if c.is_zero() {
                    continue;
                }
                for (q, chi) in self.multiply(p, r)? {
                    let term = c.mul(&chi)?;
                    let slot = out.entry(q).or_insert_with(|| TruncatedSeries::zero(&self.coeff));
                    *slot = slot.add(&term)?;
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        Ok(out)
    }

    pub fn unit_element(&self, p: &[i64]) -> Element {
        Element::from([(p.to_vec(), TruncatedSeries::one(&self.coeff))])
    }

    /// All binary products of basis elements.
    pub fn table(&self) -> Result<Table> {
        let mut pairs = vec![];
        for (i, a) in self.basis.iter().enumerate() {
            for b in &self.basis[i..] {
                pairs.push((a.clone(), b.clone()));
            }
        }
        let products: Vec<(Vec<i64>, Vec<i64>, Element)> = pairs
            .into_par_iter()
            .map(|(a, b)| {
                let e = self.multiply(&a, &b)?;
                Ok((a, b, e))
            })
            .collect::<Result<_>>()?;
        let mut entries = BTreeMap::new();
        for (a, b, e) in products {
            for (q, c) in e {
                entries.insert(Table::key(&[a.clone(), b.clone()], &q), c);
            }
        }
        let table = Table {
            order: self.diagram.order(),
            generators: self.diagram.monoid.generators.clone(),
            bound: self.options.bound,
            basis: self.basis.clone(),
            entries,
        };
        if self.options.strict && table.needed_bound() > self.options.bound {
            return Err(ThetaError::NeedsLargerBound {
                needed: table.needed_bound(),
            });
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_affine_structure_dim2;
    use crate::series::CurveClassMonoid;
    use crate::theta::lines::tests::one_wall;

    fn p2(k: u32) -> ScatteringDiagram {
        let am = build_affine_structure_dim2(&[1, 1, 1]).unwrap();
        ScatteringDiagram::new(am, CurveClassMonoid::new(&["t"]), k).unwrap()
    }

    #[test]
    fn toric_products_are_group_ring() {
        let alg = MirrorAlgebra::new(p2(3), AlgebraOptions::default()).unwrap();
        let one = TruncatedSeries::one(alg.coefficient_context());
        assert_eq!(alg.structure_constant(&[vec![1, 0], vec![0, 1]], &[1, 1]).unwrap(), one);
        assert!(alg.structure_constant(&[vec![1, 0], vec![0, 1]], &[1, 0]).unwrap().is_zero());
        let prod = alg.multiply(&[1, 0], &[-1, -1]).unwrap();
        assert_eq!(prod.keys().collect::<Vec<_>>(), vec![&vec![0, -1]]);
        let unit = alg.multiply(&[0, 0], &[2, 1]).unwrap();
        assert_eq!(unit.keys().collect::<Vec<_>>(), vec![&vec![2, 1]]);
    }

    #[test]
    fn one_wall_products() {
        let alg = MirrorAlgebra::new(one_wall(3), AlgebraOptions::default()).unwrap();
        let prod = alg.multiply(&[1, 0], &[-1, 0]).unwrap();
        let ctx = alg.coefficient_context().clone();
        let mut t = TruncatedSeries::zero(&ctx);
        t.add_term(BigInt::one(), vec![1], vec![]);
        assert_eq!(prod.get(&vec![0, 0]), Some(&TruncatedSeries::one(&ctx)));
        assert_eq!(prod.get(&vec![0, 1]), Some(&t));
        assert_eq!(prod.len(), 2);
    }
}
