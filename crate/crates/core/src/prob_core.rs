//! Finite Kolmogorov probability spaces with exact rational weights.
//!
//! Events are sorted sets of point indices into their parent space. Every
//! probability is computed exactly; weights are stored over a common
//! denominator so that event probabilities reduce to integer sums.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Largest space for which exhaustive subset enumeration is allowed.
pub const ENUMERATION_CAP: usize = 16;

/// Parses `"p/q"`, integer and decimal literals (optionally with an exponent)
/// into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::BadRational(text.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = all_digits.parse().map_err(|_| bad())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Renders a rational as `"p/q"`, or `"p"` when integral.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// Nearest double to an exact rational.
pub fn rational_to_f64(r: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

/// A finite set of weighted points. Weights are strictly positive and sum
/// exactly to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteProbabilitySpace {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    numerators: Vec<BigInt>,
    denominator: BigInt,
}

impl FiniteProbabilitySpace {
    pub fn new<I, S>(points: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Rational)>,
        S: Into<String>,
    {
        let mut ids = Vec::new();
        let mut weights = Vec::new();
        let mut index = HashMap::new();
        for (id, w) in points {
            let id = id.into();
            if index.contains_key(&id) {
                return Err(Error::DuplicatePoint(id));
            }
            if !w.is_positive() {
                return Err(Error::NonPositiveWeight {
                    point: id,
                    weight: format_rational(&w),
                });
            }
            index.insert(id.clone(), ids.len());
            ids.push(id);
            weights.push(w);
        }
        if ids.is_empty() {
            return Err(Error::EmptySpace);
        }
        let total: Rational = weights.iter().cloned().sum();
        if !total.is_one() {
            return Err(Error::WeightSumNotOne(format_rational(&total)));
        }
        let denominator = weights
            .iter()
            .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let numerators = weights
            .iter()
            .map(|w| w.numer() * (&denominator / w.denom()))
            .collect();
        Ok(Self {
            ids,
            index,
            numerators,
            denominator,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, point: usize) -> &str {
        &self.ids[point]
    }

    pub fn weight(&self, point: usize) -> Rational {
        Rational::new(self.numerators[point].clone(), self.denominator.clone())
    }

    pub fn point_index(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::ForeignPoint(id.to_string()))
    }

    /// Builds an event from point identifiers.
    pub fn event<S: AsRef<str>>(&self, ids: &[S]) -> Result<Event> {
        let members = ids
            .iter()
            .map(|id| self.point_index(id.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Event::from_indices(members))
    }

    pub fn full_event(&self) -> Event {
        Event::from_indices(0..self.len())
    }

    pub fn atom(&self, point: usize) -> Event {
        Event::from_indices([point])
    }

    /// Set-style label, e.g. `{w1,w3}`.
    pub fn label(&self, event: &Event) -> String {
        let names: Vec<&str> = event.members().iter().map(|&i| self.id(i)).collect();
        format!("{{{}}}", names.join(","))
    }

    fn check(&self, event: &Event) -> Result<()> {
        match event.members().last() {
            Some(&i) if i >= self.len() => Err(Error::ForeignPoint(format!("#{i}"))),
            _ => Ok(()),
        }
    }

    fn mass(&self, event: &Event) -> BigInt {
        event
            .members()
            .iter()
            .map(|&i| &self.numerators[i])
            .sum()
    }
}

/// A subset of the points of a space, stored as sorted point indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Event {
    members: Vec<usize>,
}

impl Event {
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut members: Vec<usize> = indices.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        Self { members }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, point: usize) -> bool {
        self.members.binary_search(&point).is_ok()
    }

    pub fn intersect(&self, other: &Event) -> Event {
        let mut out = Vec::with_capacity(self.len().min(other.len()));
        let (mut i, mut j) = (0, 0);
        while i < self.members.len() && j < other.members.len() {
            match self.members[i].cmp(&other.members[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    out.push(self.members[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        Event { members: out }
    }

    pub fn union(&self, other: &Event) -> Event {
        Event::from_indices(self.members.iter().chain(&other.members).copied())
    }

    pub fn is_subset(&self, other: &Event) -> bool {
        self.members.iter().all(|&p| other.contains(p))
    }

    pub fn is_disjoint(&self, other: &Event) -> bool {
        self.intersect(other).is_empty()
    }

    fn from_mask(mask: u64) -> Event {
        Event {
            members: (0..64).filter(|b| mask >> b & 1 == 1).collect(),
        }
    }
}

// Smaller events first, then lexicographic on sorted members.
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.members.cmp(&other.members))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.members.iter().map(|m| m.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Pairwise-disjoint cells covering the whole space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    cells: Vec<Event>,
}

impl Partition {
    pub fn new(space: &FiniteProbabilitySpace, cells: Vec<Event>) -> Result<Self> {
        for cell in &cells {
            space.check(cell)?;
        }
        let mut seen = vec![false; space.len()];
        for cell in &cells {
            for &p in cell.members() {
                if seen[p] {
                    return Err(Error::InvalidPartition(format!(
                        "point `{}` lies in two cells",
                        space.id(p)
                    )));
                }
                seen[p] = true;
            }
        }
        if let Some(p) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!(
                "point `{}` is not covered",
                space.id(p)
            )));
        }
        Ok(Self { cells })
    }

    pub fn cells(&self) -> &[Event] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell(&self, n: usize) -> Result<&Event> {
        self.cells.get(n).ok_or(Error::CellIndex)
    }
}

/// A two-valued random variable. Cell indices are 0-based internally; the
/// model file uses 1 and 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DichotomousVariable {
    name: String,
    values: [Rational; 2],
    assignment: Vec<u8>,
    partition: Partition,
}

impl DichotomousVariable {
    pub fn new(
        space: &FiniteProbabilitySpace,
        name: impl Into<String>,
        values: [Rational; 2],
        assignment: Vec<u8>,
    ) -> Result<Self> {
        let name = name.into();
        if values[0] == values[1] {
            return Err(Error::EqualValues(name));
        }
        if assignment.len() != space.len() {
            let missing = space.ids().get(assignment.len()).cloned().unwrap_or_default();
            return Err(Error::PartialAssignment {
                variable: name,
                point: missing,
            });
        }
        if let Some(p) = assignment.iter().position(|&k| k > 1) {
            return Err(Error::BadAssignmentIndex {
                variable: name,
                point: space.id(p).to_string(),
                index: assignment[p] as i64 + 1,
            });
        }
        let cells: Vec<Event> = (0..2u8)
            .map(|k| {
                Event::from_indices(
                    assignment
                        .iter()
                        .enumerate()
                        .filter(|(_, &v)| v == k)
                        .map(|(i, _)| i),
                )
            })
            .collect();
        if cells.iter().any(Event::is_empty) {
            return Err(Error::EmptyCell(name));
        }
        let partition = Partition::new(space, cells)?;
        Ok(Self {
            name,
            values,
            assignment,
            partition,
        })
    }

    /// Builds the variable from its first cell; every other point gets the
    /// second value.
    pub fn from_first_cell(
        space: &FiniteProbabilitySpace,
        name: impl Into<String>,
        values: [Rational; 2],
        first: &Event,
    ) -> Result<Self> {
        space.check(first)?;
        let assignment = (0..space.len())
            .map(|p| if first.contains(p) { 0 } else { 1 })
            .collect();
        Self::new(space, name, values, assignment)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[Rational; 2] {
        &self.values
    }

    pub fn value(&self, k: usize) -> &Rational {
        &self.values[k]
    }

    pub fn cell_index_at(&self, point: usize) -> usize {
        self.assignment[point] as usize
    }

    pub fn value_at(&self, point: usize) -> &Rational {
        &self.values[self.cell_index_at(point)]
    }

    pub fn cell(&self, k: usize) -> &Event {
        &self.partition.cells()[k]
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }
}

pub fn probability(space: &FiniteProbabilitySpace, event: &Event) -> Result<Rational> {
    space.check(event)?;
    Ok(Rational::new(space.mass(event), space.denominator.clone()))
}

/// Bayes conditional probability `P(a | c)`.
pub fn conditional(space: &FiniteProbabilitySpace, a: &Event, c: &Event) -> Result<Rational> {
    space.check(a)?;
    space.check(c)?;
    let denom = space.mass(c);
    if denom.is_zero() {
        return Err(Error::ZeroCondition);
    }
    Ok(Rational::new(space.mass(&a.intersect(c)), denom))
}

/// `c` meets every cell of the partition with positive probability.
pub fn is_context(space: &FiniteProbabilitySpace, c: &Event, partition: &Partition) -> bool {
    if space.check(c).is_err() {
        return false;
    }
    partition
        .cells()
        .iter()
        .all(|cell| space.mass(&cell.intersect(c)).is_positive())
}

/// Every pair of cells of the two induced partitions intersects with
/// positive probability.
pub fn variables_incompatible(
    space: &FiniteProbabilitySpace,
    a: &DichotomousVariable,
    b: &DichotomousVariable,
) -> bool {
    a.partition().cells().iter().all(|ac| {
        b.partition()
            .cells()
            .iter()
            .all(|bc| space.mass(&ac.intersect(bc)).is_positive())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct SetSystemReport {
    /// Every `A_j ∩ B_k` is nonempty.
    pub nonempty_intersections: bool,
    /// No `A_j ⊆ B_k` and no `B_k ⊆ A_j`.
    pub no_inclusions: bool,
}

/// Evaluates the intersection and inclusion conditions for two set families
/// covering the same ground set.
pub fn set_system_compatibility_report(a_family: &[Event], b_family: &[Event]) -> SetSystemReport {
    let pairs = || a_family.iter().flat_map(|a| b_family.iter().map(move |b| (a, b)));
    SetSystemReport {
        nonempty_intersections: pairs().all(|(a, b)| !a.is_disjoint(b)),
        no_inclusions: pairs().all(|(a, b)| !a.is_subset(b) && !b.is_subset(a)),
    }
}

/// All nonempty events of the space in canonical order.
pub fn enumerate_events(space: &FiniteProbabilitySpace) -> Result<Vec<Event>> {
    if space.len() > ENUMERATION_CAP {
        return Err(Error::TooManyPoints {
            points: space.len(),
            cap: ENUMERATION_CAP,
        });
    }
    let mut events: Vec<Event> = (1u64..1 << space.len()).map(Event::from_mask).collect();
    events.sort();
    Ok(events)
}

/// All contexts of a partition, by exhaustive enumeration.
pub fn enumerate_contexts(space: &FiniteProbabilitySpace, partition: &Partition) -> Result<Vec<Event>> {
    Ok(enumerate_events(space)?
        .into_iter()
        .filter(|c| is_context(space, c, partition))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn kq(q: &str) -> (FiniteProbabilitySpace, DichotomousVariable, DichotomousVariable) {
        let q = r(q);
        let half_rest = (Rational::one() - &q * Rational::from_integer(2.into())) / Rational::from_integer(2.into());
        let space = FiniteProbabilitySpace::new(vec![
            ("w1", q.clone()),
            ("w2", half_rest.clone()),
            ("w3", q),
            ("w4", half_rest),
        ])
        .unwrap();
        let a = DichotomousVariable::new(&space, "a", [r("1"), r("-1")], vec![0, 0, 1, 1]).unwrap();
        let b = DichotomousVariable::new(&space, "b", [r("1"), r("-1")], vec![0, 1, 1, 0]).unwrap();
        (space, a, b)
    }

    #[test]
    fn rational_literals() {
        assert_eq!(r("1/3"), Rational::new(1.into(), 3.into()));
        assert_eq!(r("0.25"), Rational::new(1.into(), 4.into()));
        assert_eq!(r("-1.5"), Rational::new((-3).into(), 2.into()));
        assert_eq!(r("2.5e-1"), Rational::new(1.into(), 4.into()));
        assert_eq!(r(".5"), Rational::new(1.into(), 2.into()));
        assert_eq!(r("7"), Rational::from_integer(7.into()));
        for bad in ["", "1/0", "abc", "1.2.3", "-", "1e"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn space_validation() {
        let third = r("1/3");
        assert!(FiniteProbabilitySpace::new(vec![("x", third.clone()); 3]).is_err());
        assert_eq!(
            FiniteProbabilitySpace::new(vec![("x", r("0.5")), ("y", r("0.49"))]),
            Err(Error::WeightSumNotOne("99/100".into()))
        );
        assert!(matches!(
            FiniteProbabilitySpace::new(vec![("x", r("1")), ("y", r("0"))]),
            Err(Error::NonPositiveWeight { .. })
        ));
        assert!(FiniteProbabilitySpace::new(vec![("x", third.clone()), ("y", third.clone()), ("z", third)]).is_ok());
    }

    #[test]
    fn kq_probabilities() {
        let (space, a, b) = kq("1/4");
        assert_eq!(probability(&space, a.cell(0)).unwrap(), r("1/2"));
        assert_eq!(probability(&space, &space.full_event()).unwrap(), r("1"));
        let w13 = space.event(&["w1", "w3"]).unwrap();
        assert_eq!(probability(&space, &w13).unwrap(), r("1/2"));
        assert!(variables_incompatible(&space, &a, &b));
        assert!(!variables_incompatible(&space, &a, &a));
    }

    #[test]
    fn kq_conditionals() {
        // P(B1 | C123) = 2q/(2q+1); P(B1 | C124) = 1/(2(1-q))
        let (space, _, b) = kq("1/4");
        let c123 = space.event(&["w1", "w2", "w3"]).unwrap();
        assert_eq!(conditional(&space, b.cell(0), &c123).unwrap(), r("1/3"));
        let (space, _, b) = kq("1/8");
        let c124 = space.event(&["w1", "w2", "w4"]).unwrap();
        assert_eq!(conditional(&space, b.cell(0), &c124).unwrap(), r("4/7"));
        let full = space.full_event();
        assert_eq!(
            conditional(&space, b.cell(0), &full).unwrap(),
            probability(&space, b.cell(0)).unwrap()
        );
        assert_eq!(
            conditional(&space, b.cell(0), &Event::empty()),
            Err(Error::ZeroCondition)
        );
    }

    #[test]
    fn foreign_points_rejected() {
        let (space, _, _) = kq("1/4");
        assert_eq!(space.event(&["w9"]), Err(Error::ForeignPoint("w9".into())));
        assert!(matches!(
            probability(&space, &Event::from_indices([7])),
            Err(Error::ForeignPoint(_))
        ));
    }

    #[test]
    fn contexts_of_kq() {
        let (space, a, _) = kq("3/8");
        let c123 = space.event(&["w1", "w2", "w3"]).unwrap();
        assert!(is_context(&space, &c123, a.partition()));
        assert!(!is_context(&space, a.cell(0), a.partition()));
        assert!(is_context(&space, &space.full_event(), a.partition()));
        // 2x2 choices of nonempty subsets of each cell
        assert_eq!(enumerate_contexts(&space, a.partition()).unwrap().len(), 9);
    }

    #[test]
    fn identical_partitions_are_compatible() {
        let (space, a, _) = kq("1/4");
        let same = DichotomousVariable::from_first_cell(&space, "b", [r("0"), r("1")], a.cell(0)).unwrap();
        assert!(!variables_incompatible(&space, &a, &same));
    }

    #[test]
    fn variable_validation() {
        let (space, _, _) = kq("1/4");
        assert_eq!(
            DichotomousVariable::new(&space, "c", [r("1"), r("1")], vec![0, 1, 0, 1]),
            Err(Error::EqualValues("c".into()))
        );
        assert_eq!(
            DichotomousVariable::new(&space, "c", [r("1"), r("2")], vec![0, 0, 0, 0]),
            Err(Error::EmptyCell("c".into()))
        );
        assert!(matches!(
            DichotomousVariable::new(&space, "c", [r("1"), r("2")], vec![0, 1, 0]),
            Err(Error::PartialAssignment { .. })
        ));
    }

    #[test]
    fn seven_point_system() {
        let cells = |v: &[&[usize]]| v.iter().map(|c| Event::from_indices(c.iter().copied())).collect::<Vec<_>>();
        let a = cells(&[&[1, 2, 3], &[4, 5], &[6, 7]]);
        let b = cells(&[&[1, 4], &[2, 5, 6], &[3, 7]]);
        let report = set_system_compatibility_report(&a, &b);
        assert_eq!(
            report,
            SetSystemReport {
                nonempty_intersections: false,
                no_inclusions: true
            }
        );
        let nested = cells(&[&[1, 2, 3, 4], &[5, 6, 7]]);
        let inner = cells(&[&[1, 2], &[3, 4, 5, 6, 7]]);
        assert!(!set_system_compatibility_report(&inner, &nested).no_inclusions);
    }

    #[test]
    fn enumeration_cap() {
        let w = Rational::new(1.into(), 17.into());
        let space = FiniteProbabilitySpace::new((0..17).map(|i| (format!("p{i}"), w.clone()))).unwrap();
        assert!(matches!(enumerate_events(&space), Err(Error::TooManyPoints { .. })));
    }
}
