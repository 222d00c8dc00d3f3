//! Surgery descriptions of Seifert bundles: Euler number, canonical
//! normalization and equivalence of descriptions.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{int, rat, Rational};

/// Genus of the base surface plus the coprime surgery coefficients `(p, q)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurgeryData {
    pub genus: u32,
    pub coefficients: Vec<(i64, i64)>,
}

impl SurgeryData {
    pub fn new(genus: u32, coefficients: Vec<(i64, i64)>) -> Result<Self> {
        let d = SurgeryData {
            genus,
            coefficients,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.coefficients.is_empty() {
            return Err(Error::InvalidSurgery("coefficient list is empty".into()));
        }
        for &(p, q) in &self.coefficients {
            if p < 1 {
                return Err(Error::InvalidSurgery(format!(
                    "pair ({p}, {q}): p must be positive"
                )));
            }
            if p.gcd(&q) != 1 {
                return Err(Error::InvalidSurgery(format!(
                    "pair ({p}, {q}) is not coprime"
                )));
            }
        }
        Ok(())
    }

    /// `e = -sum q/p`, exact.
    pub fn euler_number(&self) -> Rational {
        -self
            .coefficients
            .iter()
            .map(|&(p, q)| rat(q, p))
            .fold(int(0), |a, b| a + b)
    }

    /// Canonical representative: singular pairs reduced to `0 < q < p` and
    /// sorted by `(p, q)`, followed by one integer pair `(1, b)` that keeps the
    /// Euler number unchanged.
    pub fn normalize(&self) -> SurgeryData {
        let mut singular = Vec::new();
        let mut b: i64 = 0;
        for &(p, q) in &self.coefficients {
            if p == 1 {
                b += q;
            } else {
                let (fl, r) = q.div_mod_floor(&p);
                b += fl;
                singular.push((p, r));
            }
        }
        singular.sort_unstable();
        singular.push((1, b));
        SurgeryData {
            genus: self.genus,
            coefficients: singular,
        }
    }

    /// Same Seifert bundle up to equivariant diffeomorphism.
    pub fn equivalent(&self, other: &SurgeryData) -> bool {
        self.genus == other.genus && self.normalize() == other.normalize()
    }

    /// Pairs with `p >= 2` of the normalized data: one per singular orbit.
    pub fn singular_pairs(&self) -> Vec<(i64, i64)> {
        self.normalize()
            .coefficients
            .into_iter()
            .filter(|&(p, _)| p >= 2)
            .collect()
    }

    pub fn max_stabilizer(&self) -> i64 {
        self.coefficients.iter().map(|&(p, _)| p).max().unwrap_or(1)
    }
}

/// Surgery data realizing a given Euler number on a genus-`genus` base:
/// `[(d, r), (1, m)]` with `-e = n/d = r/d + m`, or `[(1, m)]` when `d = 1`.
pub fn realize_euler(genus: u32, e: &Rational) -> SurgeryData {
    let target = -e.clone();
    let n = i64::try_from(target.numer().clone()).expect("Euler numerator fits in i64");
    let d = i64::try_from(target.denom().clone()).expect("Euler denominator fits in i64");
    let (m, r) = n.div_mod_floor(&d);
    let coefficients = if d == 1 {
        vec![(1, m)]
    } else {
        vec![(d, r), (1, m)]
    };
    SurgeryData {
        genus,
        coefficients,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sd(g: u32, c: &[(i64, i64)]) -> SurgeryData {
        SurgeryData::new(g, c.to_vec()).unwrap()
    }

    #[test]
    fn euler_examples() {
        assert_eq!(sd(0, &[(1, 0)]).euler_number(), int(0));
        assert_eq!(sd(0, &[(2, 1), (3, 1), (5, 1)]).euler_number(), rat(-31, 30));
        assert_eq!(sd(0, &[(2, -1), (2, 1)]).euler_number(), int(0));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(sd(0, &[(1, 2)]).normalize().coefficients, vec![(1, 2)]);
        assert_eq!(sd(0, &[(1, 1), (1, 1)]).normalize().coefficients, vec![(1, 2)]);
        assert_eq!(sd(0, &[(2, 3)]).normalize().coefficients, vec![(2, 1), (1, 1)]);
        assert_eq!(
            sd(0, &[(5, -7), (3, 2)]).normalize().coefficients,
            vec![(3, 2), (5, 3), (1, -2)]
        );
    }

    #[test]
    fn equivalence_examples() {
        assert!(sd(0, &[(1, 1), (1, 1)]).equivalent(&sd(0, &[(1, 2)])));
        assert!(!sd(1, &[(1, 2)]).equivalent(&sd(0, &[(1, 2)])));
        assert!(!sd(0, &[(2, 1)]).equivalent(&sd(0, &[(2, -1)])));
    }

    #[test]
    fn rejects_invalid() {
        assert!(SurgeryData::new(0, vec![]).is_err());
        assert!(SurgeryData::new(0, vec![(4, 2)]).is_err());
        assert!(SurgeryData::new(0, vec![(0, 1)]).is_err());
        assert!(SurgeryData::new(0, vec![(2, 0)]).is_err());
    }

    #[test]
    fn realize_round_trips() {
        for e in [rat(-31, 30), int(3), rat(1, 2), int(-1), rat(-7, 4)] {
            let d = realize_euler(2, &e);
            d.validate().unwrap();
            assert_eq!(d.euler_number(), e);
        }
    }

    fn pair() -> impl Strategy<Value = (i64, i64)> {
        (1i64..9, -20i64..20).prop_filter("coprime", |(p, q)| p.gcd(q) == 1)
    }

    proptest! {
        #[test]
        fn euler_invariant_under_normalize_and_permutation(
            mut c in prop::collection::vec(pair(), 1..6),
            rot in 0usize..6,
        ) {
            let d = SurgeryData::new(0, c.clone()).unwrap();
            let e = d.euler_number();
            prop_assert_eq!(d.normalize().euler_number(), e.clone());
            let n = c.len();
            c.rotate_left(rot % n);
            let d2 = SurgeryData::new(0, c).unwrap();
            prop_assert_eq!(d2.euler_number(), e);
            prop_assert!(d.equivalent(&d2));
        }

        #[test]
        fn integral_data_normalizes_to_one_pair(qs in prop::collection::vec(-9i64..9, 1..6)) {
            let d = SurgeryData::new(3, qs.iter().map(|&q| (1, q)).collect()).unwrap();
            prop_assert_eq!(d.normalize().coefficients.len(), 1);
        }

        #[test]
        fn normalize_is_idempotent(c in prop::collection::vec(pair(), 1..6)) {
            let n = SurgeryData::new(0, c).unwrap().normalize();
            prop_assert_eq!(n.normalize(), n);
        }
    }
}
