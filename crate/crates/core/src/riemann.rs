//! Path classes over a punctured plane and generalized conjugations.
//!
//! A tobogganic path that starts and ends on the real line is recorded by the
//! order in which it loops around the punctures: a word in the free group on
//! `M` generators. Generalized conjugations act on those words and, in a
//! second representation, on the continuous argument accumulated around each
//! puncture.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::{Error, Result};

const MODULE: &str = "riemann";

/// Largest number of punctures supported by [`enumerate_classes`].
pub const MAX_ENUM_PUNCTURES: usize = 2;
/// Longest word length supported by [`enumerate_classes`].
pub const MAX_ENUM_LENGTH: usize = 12;

/// One loop around puncture `puncture` (1-based) in direction `exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub puncture: usize,
    pub exponent: i8,
}

impl Letter {
    pub fn new(puncture: usize, exponent: i8) -> Self {
        Letter { puncture, exponent }
    }

    pub fn inverse(self) -> Self {
        Letter {
            puncture: self.puncture,
            exponent: -self.exponent,
        }
    }

    fn cancels(self, other: Letter) -> bool {
        self.puncture == other.puncture && self.exponent == -other.exponent
    }

    // g1 < g1^-1 < g2 < g2^-1 < ...
    fn rank(self) -> (usize, bool) {
        (self.puncture, self.exponent < 0)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent < 0 {
            write!(f, "g{}^-1", self.puncture)
        } else {
            write!(f, "g{}", self.puncture)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct HomotopyWord {
    pub letters: Vec<Letter>,
}

impl HomotopyWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        HomotopyWord { letters }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a word from `(puncture, exponent)` pairs.
    pub fn from_pairs(pairs: &[(usize, i8)]) -> Self {
        HomotopyWord::new(pairs.iter().map(|&(k, e)| Letter::new(k, e)).collect())
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Concatenation `self * other`, not reduced.
    pub fn concat(&self, other: &HomotopyWord) -> HomotopyWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        HomotopyWord { letters }
    }

    pub fn inverse(&self) -> HomotopyWord {
        HomotopyWord {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|w| !w[0].cancels(w[1]))
    }

    fn validate(&self, m: usize) -> Result<()> {
        if m == 0 {
            return Err(Error::validation(MODULE, "at least one puncture is required"));
        }
        for (i, l) in self.letters.iter().enumerate() {
            if l.puncture == 0 || l.puncture > m {
                return Err(Error::validation(
                    MODULE,
                    format!("letter {i} refers to puncture {} outside 1..={m}", l.puncture),
                ));
            }
            if l.exponent != 1 && l.exponent != -1 {
                return Err(Error::validation(
                    MODULE,
                    format!("letter {i} has exponent {}, expected +1 or -1", l.exponent),
                ));
            }
        }
        Ok(())
    }
}

impl fmt::Display for HomotopyWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("e");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Punctures of the plane with their mirror involution under conjugation.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPointSet {
    points: Vec<Complex64>,
    mirror: Vec<usize>,
    cut_direction: Complex64,
}

impl BranchPointSet {
    /// Matches each point with its conjugate (within `1e-12` relative); fails if
    /// the set is not closed under conjugation.
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::validation(MODULE, "at least one puncture is required"));
        }
        let scale = points.iter().map(|p| p.norm()).fold(1.0, f64::max);
        let tol = 1e-12 * scale;
        for (i, p) in points.iter().enumerate() {
            if !p.re.is_finite() || !p.im.is_finite() {
                return Err(Error::validation(MODULE, format!("puncture {} is not finite", i + 1)));
            }
            for (j, q) in points.iter().enumerate().take(i) {
                if (p - q).norm() <= tol {
                    return Err(Error::validation(
                        MODULE,
                        format!("punctures {} and {} coincide", j + 1, i + 1),
                    ));
                }
            }
        }
        let mut mirror = Vec::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            let image = points
                .iter()
                .position(|q| (q - p.conj()).norm() <= tol)
                .ok_or_else(|| {
                    Error::validation(
                        MODULE,
                        format!("conjugate of puncture {} ({p}) is not in the set", i + 1),
                    )
                })?;
            mirror.push(image + 1);
        }
        Ok(BranchPointSet {
            points,
            mirror,
            cut_direction: Complex64::new(0.0, 1.0),
        })
    }

    /// Explicit mirror map (1-based), checked to be an involution pairing
    /// conjugate points.
    pub fn with_mirror(points: Vec<Complex64>, mirror: Vec<usize>) -> Result<Self> {
        let set = Self::new(points)?;
        if mirror.len() != set.len() {
            return Err(Error::validation(MODULE, "mirror map length differs from puncture count"));
        }
        for (i, &s) in mirror.iter().enumerate() {
            if s == 0 || s > set.len() || mirror[s - 1] != i + 1 {
                return Err(Error::validation(MODULE, "mirror map is not an involution"));
            }
            if set.mirror[i] != s {
                return Err(Error::validation(
                    MODULE,
                    format!("mirror of puncture {} is not its conjugate", i + 1),
                ));
            }
        }
        Ok(set)
    }

    /// Single branch point at the origin.
    pub fn origin() -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0)]).expect("origin is self-conjugate")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// sigma(k) for 1-based `k`.
    pub fn mirror(&self, k: usize) -> usize {
        self.mirror[k - 1]
    }

    pub fn cut_direction(&self) -> Complex64 {
        self.cut_direction
    }
}

/// Sign multiindex selecting one generalized conjugation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConjugationChoice {
    pub signs: Vec<i8>,
}

impl ConjugationChoice {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::validation(MODULE, "conjugation choice is empty"));
        }
        if let Some(s) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::validation(MODULE, format!("sign {s} is not +1 or -1")));
        }
        Ok(ConjugationChoice { signs })
    }

    pub fn uniform(m: usize, sign: i8) -> Self {
        ConjugationChoice {
            signs: vec![sign; m],
        }
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    fn check(&self, m: usize) -> Result<()> {
        if self.signs.len() != m {
            return Err(Error::validation(
                MODULE,
                format!("conjugation choice has {} signs for {m} punctures", self.signs.len()),
            ));
        }
        Self::new(self.signs.clone()).map(|_| ())
    }
}

/// Continuous argument accumulated around each puncture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SheetState {
    pub theta: Vec<f64>,
}

impl SheetState {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if let Some(i) = theta.iter().position(|t| !t.is_finite()) {
            return Err(Error::validation(MODULE, format!("theta[{i}] is not finite")));
        }
        Ok(SheetState { theta })
    }

    /// Sheet label around puncture `k` (0-based): floor((theta + pi) / 2 pi).
    pub fn sheet(&self, k: usize) -> i64 {
        ((self.theta[k] + PI) / (2.0 * PI)).floor() as i64
    }

    pub fn sheets(&self) -> Vec<i64> {
        (0..self.theta.len()).map(|k| self.sheet(k)).collect()
    }
}

/// Free reduction with a stack.
pub fn reduce(word: &HomotopyWord, m: usize) -> Result<HomotopyWord> {
    word.validate(m)?;
    Ok(reduce_unchecked(word))
}

fn reduce_unchecked(word: &HomotopyWord) -> HomotopyWord {
    let mut out: Vec<Letter> = Vec::with_capacity(word.len());
    for &l in &word.letters {
        match out.last() {
            Some(&top) if top.cancels(l) => {
                out.pop();
            }
            _ => out.push(l),
        }
    }
    HomotopyWord { letters: out }
}

/// Exponent sum per puncture.
pub fn abelianize(word: &HomotopyWord, m: usize) -> Result<Vec<i64>> {
    word.validate(m)?;
    let mut w = vec![0i64; m];
    for l in &word.letters {
        w[l.puncture - 1] += i64::from(l.exponent);
    }
    Ok(w)
}

/// Image of a single generator `g_k` under the conjugation chosen by `sign`.
fn generator_image(k: usize, set: &BranchPointSet, sign: i8) -> Vec<Letter> {
    let s = set.mirror(k);
    if sign > 0 {
        vec![Letter::new(s, -1)]
    } else {
        // pushed through the cut rotated the other way
        vec![Letter::new(s, 1), Letter::new(s, -1), Letter::new(s, -1)]
    }
}

/// Applies the generalized conjugation `rho` to a path class.
pub fn conjugate_word(
    word: &HomotopyWord,
    set: &BranchPointSet,
    rho: &ConjugationChoice,
) -> Result<HomotopyWord> {
    let m = set.len();
    word.validate(m)?;
    rho.check(m)?;
    let mut letters = Vec::with_capacity(word.len());
    for l in &word.letters {
        let image = generator_image(l.puncture, set, rho.signs[l.puncture - 1]);
        if l.exponent > 0 {
            letters.extend(image);
        } else {
            letters.extend(image.into_iter().rev().map(Letter::inverse));
        }
    }
    Ok(reduce_unchecked(&HomotopyWord { letters }))
}

/// Theta_k -> -Theta_k + 2 pi signs[k].
pub fn apply_conjugation_sheets(state: &SheetState, rho: &ConjugationChoice) -> Result<SheetState> {
    rho.check(state.theta.len())?;
    SheetState::new(
        state
            .theta
            .iter()
            .zip(&rho.signs)
            .map(|(&t, &s)| -t + 2.0 * PI * f64::from(s))
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifiedWord {
    pub word: String,
    pub winding: Vec<i64>,
    pub length: usize,
    #[serde(skip)]
    pub letters: HomotopyWord,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindingClass {
    pub winding: Vec<i64>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub punctures: usize,
    pub max_length: usize,
    pub total: usize,
    pub classes: Vec<WindingClass>,
    pub words: Vec<ClassifiedWord>,
}

/// All reduced words of length `len` over `m` generators, in generator order.
fn reduced_words_of_length(m: usize, len: usize) -> Vec<HomotopyWord> {
    let alphabet: Vec<Letter> = (1..=m)
        .flat_map(|k| [Letter::new(k, 1), Letter::new(k, -1)])
        .collect();
    let mut layer = vec![HomotopyWord::empty()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(layer.len() * (2 * m).saturating_sub(1).max(1));
        for w in &layer {
            for &l in &alphabet {
                if w.letters.last().is_some_and(|&t| t.cancels(l)) {
                    continue;
                }
                let mut letters = Vec::with_capacity(w.len() + 1);
                letters.extend_from_slice(&w.letters);
                letters.push(l);
                next.push(HomotopyWord { letters });
            }
        }
        layer = next;
    }
    layer
}

/// Every reduced word up to `max_length`, sorted by winding multiindex, then
/// length, then letters; with the number of words per multiindex.
pub fn enumerate_classes(m: usize, max_length: usize) -> Result<Classification> {
    enumerate_classes_with(m, max_length, Execution::default())
}

pub fn enumerate_classes_with(
    m: usize,
    max_length: usize,
    exec: Execution,
) -> Result<Classification> {
    if m == 0 || m > MAX_ENUM_PUNCTURES {
        return Err(Error::Capability(format!(
            "enumeration supports 1..={MAX_ENUM_PUNCTURES} punctures, got {m}"
        )));
    }
    if max_length > MAX_ENUM_LENGTH {
        return Err(Error::Capability(format!(
            "enumeration supports words up to length {MAX_ENUM_LENGTH}, got {max_length}"
        )));
    }
    let layers = exec.map_range(max_length + 1, |len| {
        reduced_words_of_length(m, len)
            .into_iter()
            .map(|w| {
                let winding = abelianize(&w, m).expect("generated letters are in range");
                (winding, w)
            })
            .collect::<Vec<_>>()
    });
    let mut all: Vec<(Vec<i64>, HomotopyWord)> = layers.into_iter().flatten().collect();
    all.sort_by(|(wa, a), (wb, b)| {
        wa.cmp(wb)
            .then(a.len().cmp(&b.len()))
            .then_with(|| {
                a.letters
                    .iter()
                    .map(|l| l.rank())
                    .cmp(b.letters.iter().map(|l| l.rank()))
            })
    });
    let mut counts: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    for (w, _) in &all {
        *counts.entry(w.clone()).or_default() += 1;
    }
    let words: Vec<ClassifiedWord> = all
        .into_iter()
        .map(|(winding, w)| ClassifiedWord {
            word: w.to_string(),
            length: w.len(),
            winding,
            letters: w,
        })
        .collect();
    Ok(Classification {
        punctures: m,
        max_length,
        total: words.len(),
        classes: counts
            .into_iter()
            .map(|(winding, count)| WindingClass { winding, count })
            .collect(),
        words,
    })
}
