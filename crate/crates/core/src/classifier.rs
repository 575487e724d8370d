//! End-to-end classification: monodromy partition, Dirichlet commutant
//! dimension and decomposability, checked against the known tables for
//! orders five through eight.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::blaschke::BlaschkeProduct;
use crate::commutant::{self, DirichletReport};
use crate::config::ToolConfig;
use crate::continuation::{MonodromyReport, Surface};
use crate::error::{Error, Result};
use crate::partition::{self, Conditions, Partition};
use crate::Cplx;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CrossCheck {
    Pass,
    Fail { computed: String, expected: String },
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub order: usize,
    pub partition: Partition,
    /// Number of blocks, equal to the Bergman commutant dimension.
    pub q: usize,
    pub dual_partition: Partition,
    pub conditions: Conditions,
    pub dirichlet_dim: usize,
    pub reducible_dirichlet: bool,
    pub equivalent_to_power: bool,
    pub decomposable: bool,
    pub subgroup_witnesses: Vec<Vec<usize>>,
    pub theorem_case: Option<String>,
    /// Every table label consistent with the computed data.
    pub matching_cases: Vec<String>,
    pub cross_check: CrossCheck,
    pub monodromy: MonodromyReport,
    pub dirichlet: DirichletReport,
}

fn part(n: usize, blocks: &[&[usize]]) -> Partition {
    Partition::new(n, blocks.iter().map(|b| b.to_vec()).collect()).expect("static partition")
}

fn order5_trichotomy() -> [(&'static str, Partition); 3] {
    [("a", Partition::singletons(5)), ("b", part(5, &[&[0], &[1, 4], &[2, 3]])), ("c", part(5, &[&[0], &[1, 2, 3, 4]]))]
}

/// `(label, partition, dim)`; `None` partition matches any.
fn order6_table() -> Vec<(&'static str, Option<Partition>, usize)> {
    let odd_triple = part(6, &[&[0], &[1, 3, 5], &[2], &[4]]);
    let pairs = part(6, &[&[0], &[1, 4], &[2, 5], &[3]]);
    vec![
        ("A", Some(Partition::singletons(6)), 6),
        ("B", Some(odd_triple.clone()), 3),
        ("C", Some(odd_triple), 2),
        ("D", Some(pairs.clone()), 2),
        ("E", Some(pairs), 3),
        ("F", Some(part(6, &[&[0], &[1, 2, 4, 5], &[3]])), 2),
        ("G", Some(part(6, &[&[0], &[1, 3, 5], &[2, 4]])), 2),
        ("H", None, 1),
    ]
}

fn order8_patterns() -> [(&'static str, Partition); 3] {
    [
        ("pattern-i", part(8, &[&[0], &[1, 3, 5, 7], &[2], &[4], &[6]])),
        ("pattern-ii-a", part(8, &[&[0], &[1, 5], &[2, 6], &[3, 7], &[4]])),
        ("pattern-ii-b", part(8, &[&[0], &[1, 3, 5, 7], &[2, 6], &[4]])),
    ]
}

fn verdict(ok: bool, computed: String, expected: String) -> CrossCheck {
    if ok {
        CrossCheck::Pass
    } else {
        CrossCheck::Fail { computed, expected }
    }
}

struct TableMatch {
    theorem_case: Option<String>,
    matching: Vec<String>,
    cross_check: CrossCheck,
}

fn match_tables(p: &Partition, dim: usize, equivalent: bool) -> TableMatch {
    let n = p.n();
    let computed = format!("partition {p}, dim {dim}, equivalent_to_power {equivalent}");
    match n {
        5 => {
            let label = order5_trichotomy().into_iter().find(|(_, t)| t == p).map(|(l, _)| l.to_string());
            let ok = label.is_some() && (dim > 1) == equivalent;
            TableMatch {
                matching: label.iter().cloned().collect(),
                theorem_case: label,
                cross_check: verdict(ok, computed, "trichotomy partition and dim > 1 iff equivalent to z^5".into()),
            }
        }
        6 => {
            let matching: Vec<String> = order6_table()
                .into_iter()
                .filter(|(_, tp, d)| *d == dim && tp.as_ref().is_none_or(|tp| tp == p))
                .map(|(l, _, _)| l.to_string())
                .collect();
            let is_a = matching.iter().any(|l| l == "A");
            let ok = !matching.is_empty() && is_a == equivalent;
            let expected = order6_table()
                .into_iter()
                .filter(|(_, tp, _)| tp.as_ref().is_none_or(|tp| tp == p))
                .map(|(l, _, d)| format!("{l}: dim {d}"))
                .collect::<Vec<_>>()
                .join("; ");
            TableMatch {
                theorem_case: (!matching.is_empty()).then(|| matching.join("/")),
                matching,
                cross_check: verdict(ok, computed, expected),
            }
        }
        7 => {
            let admissible = partition::enumerate_admissible(7, false).map(|l| l.contains(p)).unwrap_or(false);
            let ok = admissible && (dim > 1) == equivalent;
            let label = if dim > 1 { "power" } else { "irreducible" }.to_string();
            TableMatch {
                theorem_case: Some(label.clone()),
                matching: vec![label],
                cross_check: verdict(ok, computed, "admissible partition and dim > 1 iff equivalent to z^7".into()),
            }
        }
        8 => {
            let label = order8_patterns().into_iter().find(|(_, t)| t == p).map(|(l, _)| l.to_string());
            TableMatch {
                matching: label.iter().cloned().collect(),
                theorem_case: label,
                cross_check: CrossCheck::NotApplicable,
            }
        }
        _ => TableMatch { theorem_case: None, matching: Vec::new(), cross_check: CrossCheck::NotApplicable },
    }
}

pub fn classify(b: &BlaschkeProduct, cfg: &ToolConfig) -> Result<ClassificationReport> {
    let surface = Surface::new(b, cfg)?;
    let monodromy = surface.monodromy()?;
    let dirichlet = commutant::dirichlet_from_monodromy(&surface, &monodromy)?;
    let partition = monodromy.partition.clone();
    let equivalent = b.equivalent_to_power();
    let witnesses = partition::subgroup_unions(&partition);
    let table = match_tables(&partition, dirichlet.dim, equivalent);
    Ok(ClassificationReport {
        order: b.order(),
        q: partition.q(),
        dual_partition: partition::dual_partition(&partition),
        conditions: partition::check_conditions(&partition),
        dirichlet_dim: dirichlet.dim,
        reducible_dirichlet: dirichlet.dim > 1,
        equivalent_to_power: equivalent,
        decomposable: !witnesses.is_empty(),
        subgroup_witnesses: witnesses,
        theorem_case: table.theorem_case,
        matching_cases: table.matching,
        cross_check: table.cross_check,
        partition,
        monodromy,
        dirichlet,
    })
}

/// As [`classify`], turning a failed table check into an error.
pub fn classify_strict(b: &BlaschkeProduct, cfg: &ToolConfig) -> Result<ClassificationReport> {
    let report = classify(b, cfg)?;
    if let CrossCheck::Fail { computed, expected } = &report.cross_check {
        return Err(Error::CrossCheckFailed { computed: computed.clone(), expected: expected.clone() });
    }
    Ok(report)
}

/// Zeros drawn uniformly from the disk of radius `max_modulus`, unit constant.
pub fn random_product(rng: &mut impl Rng, n: usize, max_modulus: f64) -> BlaschkeProduct {
    let zeros: Vec<(Cplx, usize)> = (0..n)
        .map(|_| {
            let r = max_modulus * rng.random::<f64>().sqrt();
            (Cplx::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU)), 1)
        })
        .collect();
    BlaschkeProduct::new(&zeros, Cplx::new(1.0, 0.0)).expect("zeros inside the disk")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteCase {
    pub label: &'static str,
    pub product: BlaschkeProduct,
    pub expected_dim: usize,
}

fn mobius_power(a: f64, k: usize) -> BlaschkeProduct {
    BlaschkeProduct::mobius(Cplx::new(a, 0.0)).and_then(|m| m.pow(k)).expect("valid parameter")
}

/// One witness per row of the order-6 table, in row order.
pub fn order6_case_suite(seed: u64) -> Result<Vec<SuiteCase>> {
    let z = |n| BlaschkeProduct::power(n);
    let compose = BlaschkeProduct::compose;
    let beta: f64 = 0.6;
    let (b5, g3) = (0.5, 0.3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(vec![
        SuiteCase { label: "A", product: z(6)?, expected_dim: 6 },
        SuiteCase { label: "B", product: compose(&mobius_power(0.5, 2), &z(3)?)?, expected_dim: 3 },
        SuiteCase {
            label: "C",
            product: compose(&mobius_power(beta.powi(3), 2), &mobius_power(beta, 3))?,
            expected_dim: 2,
        },
        SuiteCase { label: "D", product: compose(&mobius_power(0.5, 3), &z(2)?)?, expected_dim: 2 },
        SuiteCase {
            label: "E",
            product: compose(&mobius_power(beta.powi(2), 3), &mobius_power(beta, 2))?,
            expected_dim: 3,
        },
        SuiteCase {
            label: "F",
            product: compose(&mobius_power(0.4, 2).mul(&mobius_power(0.7, 1)), &z(2)?)?,
            expected_dim: 2,
        },
        SuiteCase {
            label: "G",
            product: compose(&mobius_power(b5 * b5 * g3, 2), &mobius_power(b5, 2).mul(&mobius_power(g3, 1)))?,
            expected_dim: 2,
        },
        SuiteCase { label: "H", product: random_product(&mut rng, 6, 0.85), expected_dim: 1 },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_seven_is_reducible() {
        let report = classify(&BlaschkeProduct::power(7).unwrap(), &ToolConfig::default()).unwrap();
        assert_eq!(report.dirichlet_dim, 7);
        assert!(report.reducible_dirichlet);
        assert_eq!(report.theorem_case.as_deref(), Some("power"));
        assert_eq!(report.cross_check, CrossCheck::Pass);
    }

    #[test]
    fn order_eight_pattern() {
        let b = BlaschkeProduct::compose(&mobius_power(0.3, 2), &BlaschkeProduct::power(4).unwrap()).unwrap();
        let report = classify(&b, &ToolConfig::default()).unwrap();
        assert_eq!(report.q, 5);
        assert_eq!(report.theorem_case.as_deref(), Some("pattern-i"));
    }

    #[test]
    fn order6_labels_follow_partition_and_dim() {
        let p = part(6, &[&[0], &[1, 4], &[2, 5], &[3]]);
        assert_eq!(match_tables(&p, 2, false).matching, vec!["D"]);
        assert_eq!(match_tables(&p, 3, false).matching, vec!["E"]);
        assert!(matches!(match_tables(&p, 4, false).cross_check, CrossCheck::Fail { .. }));
        assert_eq!(match_tables(&Partition::singletons(6), 1, false).matching, vec!["H"]);
    }

    #[test]
    fn unsupported_orders_have_no_case() {
        let t = match_tables(&Partition::singletons(4), 4, true);
        assert_eq!(t.cross_check, CrossCheck::NotApplicable);
        assert!(t.theorem_case.is_none());
    }

    #[test]
    fn suite_has_one_witness_per_row() {
        let suite = order6_case_suite(7).unwrap();
        let dims: Vec<usize> = suite.iter().map(|c| c.expected_dim).collect();
        assert_eq!(dims, vec![6, 3, 2, 2, 3, 2, 2, 1]);
        assert!(suite.iter().all(|c| c.product.order() == 6));
    }
}
