use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;

use super::algebra::{AbstractNilpotent, Element};
use crate::{Rat, RatPoly};

/// A right-nested bracket `[a₁,[a₂,…[a_{m-1},a_m]…]]` over letters
/// `0 = X`, `1 = Y`, with its Dynkin coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynkinTerm {
    pub word: Vec<u8>,
    pub coeff: Rat,
}

fn factorial(k: u32) -> Rat {
    Rat::from_integer((1..=k as u64).product::<u64>().into())
}

/// Dynkin's form of `log(e^X e^Y)` truncated after brackets of length
/// `step`, with equal words merged.
pub fn bch_words(step: usize) -> Vec<DynkinTerm> {
    let mut acc: BTreeMap<(usize, Vec<u8>), Rat> = BTreeMap::new();
    // blocks: list of (r_i, s_i) with r_i + s_i >= 1.
    fn rec(
        blocks: &mut Vec<(u32, u32)>,
        len: usize,
        step: usize,
        acc: &mut BTreeMap<(usize, Vec<u8>), Rat>,
    ) {
        if !blocks.is_empty() {
            let m = blocks.len() as i64;
            let sign = if m % 2 == 1 { 1 } else { -1 };
            let mut denom = Rat::from_integer((m * len as i64).into());
            let mut word = Vec::with_capacity(len);
            for &(r, s) in blocks.iter() {
                denom *= factorial(r) * factorial(s);
                word.extend(std::iter::repeat_n(0u8, r as usize));
                word.extend(std::iter::repeat_n(1u8, s as usize));
            }
            let trivially_zero = word.len() >= 2 && word[word.len() - 1] == word[word.len() - 2];
            if !trivially_zero {
                let c = Rat::from_integer(sign.into()) / denom;
                *acc.entry((word.len(), word)).or_insert_with(Rat::zero) += c;
            }
        }
        for r in 0..=(step - len) as u32 {
            for s in 0..=(step - len) as u32 - r {
                if r + s == 0 {
                    continue;
                }
                blocks.push((r, s));
                rec(blocks, len + (r + s) as usize, step, acc);
                blocks.pop();
            }
        }
    }
    rec(&mut Vec::new(), 0, step, &mut acc);
    acc.into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((_, word), coeff)| DynkinTerm { word, coeff })
        .collect()
}

/// `X * Y = log(e^X e^Y)` in the algebra, truncated at `step`.
pub fn bch(alg: &AbstractNilpotent, x: &Element, y: &Element, step: usize) -> Element {
    bch_with(alg, x, y, &bch_words(step))
}

pub(crate) fn bch_with(alg: &AbstractNilpotent, x: &Element, y: &Element, terms: &[DynkinTerm]) -> Element {
    let nvars = x.first().or(y.first()).map_or(0, RatPoly::nvars);
    let mut memo: HashMap<Vec<u8>, Element> = HashMap::new();
    let mut out = vec![RatPoly::zero(nvars); alg.dim()];
    for t in terms {
        let v = nested(alg, x, y, &t.word, &mut memo);
        for (o, c) in out.iter_mut().zip(&v) {
            if !c.is_zero() {
                *o += &c.scale(&t.coeff);
            }
        }
    }
    out
}

fn nested(
    alg: &AbstractNilpotent,
    x: &Element,
    y: &Element,
    word: &[u8],
    memo: &mut HashMap<Vec<u8>, Element>,
) -> Element {
    if let Some(v) = memo.get(word) {
        return v.clone();
    }
    let head = if word[0] == 0 { x } else { y };
    let v = if word.len() == 1 {
        head.clone()
    } else {
        let inner = nested(alg, x, y, &word[1..], memo);
        if inner.iter().all(RatPoly::is_zero) {
            inner
        } else {
            alg.bracket(head, &inner)
        }
    };
    memo.insert(word.to_vec(), v.clone());
    v
}
