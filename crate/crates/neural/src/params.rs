//! Flat parameter storage with named, row-major tensor slots.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ModelConfig;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Slot {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn of<'a, T>(&self, p: &'a [T]) -> &'a [T] {
        &p[self.offset..self.offset + self.len()]
    }

    #[inline]
    pub fn of_mut<'a, T>(&self, p: &'a mut [T]) -> &'a mut [T] {
        &mut p[self.offset..self.offset + self.len()]
    }

    #[inline]
    pub fn row<'a, T>(&self, p: &'a [T], r: usize) -> &'a [T] {
        let o = self.offset + r * self.cols;
        &p[o..o + self.cols]
    }

    #[inline]
    pub fn row_mut<'a, T>(&self, p: &'a mut [T], r: usize) -> &'a mut [T] {
        let o = self.offset + r * self.cols;
        &mut p[o..o + self.cols]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub vocab: usize,
    pub embed: usize,
    pub ctx: usize,
    /// Forward and backward encoder widths; they sum to `ctx`.
    pub ctx_f: usize,
    pub ctx_b: usize,
    pub ffn1: usize,
    pub hidden: usize,
    pub ac_types: usize,
    /// Link outputs: one per (AR type, direction).
    pub link_codes: usize,
}

/// Symbol rows of `sym_emb`.
pub const SYM_BOS: usize = 0;
pub const SYM_COPY: usize = 1;
pub const SYM_OPEN: usize = 2;
pub const SYM_CLOSE: usize = 3;

macro_rules! layout {
    ($($name:ident),* $(,)?) => {
        #[derive(Debug, Clone, PartialEq, Eq)]
        pub struct Layout {
            pub dims: Dims,
            $(pub $name: Slot,)*
        }

        impl Layout {
            pub fn slots(&self) -> Vec<(&'static str, Slot)> {
                vec![$((stringify!($name), self.$name),)*]
            }
        }
    };
}

layout!(
    tok_emb,
    enc_f_x,
    enc_f_h,
    enc_f_b,
    enc_b_x,
    enc_b_h,
    enc_b_b,
    sym_emb,
    ac_emb,
    ar_emb,
    dec_x,
    dec_h,
    dec_b,
    ffn1_w1,
    ffn1_b1,
    ffn1_w2,
    ffn1_b2,
    ffn2_w1,
    ffn2_b1,
    ffn2_w2,
    ffn2_b2,
    ffn3_wp,
    ffn3_wa,
    ffn3_b1,
    ffn3_link_w,
    ffn3_link_b,
    ffn3_null_w,
    ffn3_null_b,
    ffn3_type_w,
    ffn3_type_b,
);

impl Layout {
    pub fn new(cfg: &ModelConfig, vocab: usize, ac_types: usize, ar_types: usize) -> Self {
        let c = cfg.context_dim;
        let dims = Dims {
            vocab,
            embed: cfg.embed_dim,
            ctx: c,
            ctx_f: c - c / 2,
            ctx_b: c / 2,
            ffn1: cfg.ffn1_hidden,
            hidden: cfg.ffn_hidden,
            ac_types,
            link_codes: 2 * ar_types,
        };
        let mut off = 0;
        let mut s = |rows: usize, cols: usize| {
            let slot = Slot {
                offset: off,
                rows,
                cols,
            };
            off += rows * cols;
            slot
        };
        let (e, f, b, h) = (dims.embed, dims.ctx_f, dims.ctx_b, dims.hidden);
        Layout {
            tok_emb: s(vocab, e),
            enc_f_x: s(f, e),
            enc_f_h: s(f, f),
            enc_f_b: s(f, 1),
            enc_b_x: s(b, e),
            enc_b_h: s(b, b),
            enc_b_b: s(b, 1),
            sym_emb: s(4, c),
            ac_emb: s(ac_types, c),
            ar_emb: s(dims.link_codes, c),
            dec_x: s(c, c),
            dec_h: s(c, c),
            dec_b: s(c, 1),
            ffn1_w1: s(dims.ffn1, c),
            ffn1_b1: s(dims.ffn1, 1),
            ffn1_w2: s(3, dims.ffn1),
            ffn1_b2: s(3, 1),
            ffn2_w1: s(h, 2 * c),
            ffn2_b1: s(h, 1),
            ffn2_w2: s(1, h),
            ffn2_b2: s(1, 1),
            ffn3_wp: s(h, 2 * c),
            ffn3_wa: s(h, 2 * c),
            ffn3_b1: s(h, 1),
            ffn3_link_w: s(dims.link_codes, h),
            ffn3_link_b: s(dims.link_codes, 1),
            ffn3_null_w: s(1, h),
            ffn3_null_b: s(1, 1),
            ffn3_type_w: s(ac_types, h),
            ffn3_type_b: s(ac_types, 1),
            dims,
        }
    }

    pub fn total(&self) -> usize {
        self.slots().iter().map(|(_, s)| s.len()).sum()
    }

    pub fn get(&self, name: &str) -> Option<Slot> {
        self.slots()
            .into_iter()
            .find(|(n, _)| *n == name)
            .map(|(_, s)| s)
    }

    fn is_bias(slot: Slot) -> bool {
        slot.cols == 1
    }

    /// Weights and embeddings uniform in `±1/sqrt(cols)`, biases zero.
    pub fn init<T: Scalar>(&self, seed: u64) -> Vec<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = vec![T::zero(); self.total()];
        for (_, slot) in self.slots() {
            if Self::is_bias(slot) {
                continue;
            }
            let bound = 1.0 / (slot.cols as f64).sqrt();
            for v in slot.of_mut(&mut p) {
                *v = T::of(rng.gen_range(-bound..bound));
            }
        }
        p
    }
}

/// Parameter counts per component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ParamCounts {
    pub embeddings: usize,
    pub encoder: usize,
    pub decoder: usize,
    pub ffn1: usize,
    pub ffn2: usize,
    pub ffn3: usize,
    pub total: usize,
}

impl ParamCounts {
    pub fn of(l: &Layout) -> Self {
        let sum = |names: &[Slot]| names.iter().map(Slot::len).sum::<usize>();
        let counts = ParamCounts {
            embeddings: sum(&[l.tok_emb, l.sym_emb, l.ac_emb, l.ar_emb]),
            encoder: sum(&[
                l.enc_f_x, l.enc_f_h, l.enc_f_b, l.enc_b_x, l.enc_b_h, l.enc_b_b,
            ]),
            decoder: sum(&[l.dec_x, l.dec_h, l.dec_b]),
            ffn1: sum(&[l.ffn1_w1, l.ffn1_b1, l.ffn1_w2, l.ffn1_b2]),
            ffn2: sum(&[l.ffn2_w1, l.ffn2_b1, l.ffn2_w2, l.ffn2_b2]),
            ffn3: sum(&[
                l.ffn3_wp,
                l.ffn3_wa,
                l.ffn3_b1,
                l.ffn3_link_w,
                l.ffn3_link_b,
                l.ffn3_null_w,
                l.ffn3_null_b,
                l.ffn3_type_w,
                l.ffn3_type_b,
            ]),
            total: l.total(),
        };
        debug_assert_eq!(
            counts.embeddings
                + counts.encoder
                + counts.decoder
                + counts.ffn1
                + counts.ffn2
                + counts.ffn3,
            counts.total
        );
        counts
    }
}

/// Closed-form sizes of the boundary head (FFN2) and the link/type head
/// (FFN3) for hidden width `h`, context width `c`.
pub fn head_param_formula(h: usize, c: usize, ac_types: usize, ar_types: usize) -> (usize, usize) {
    let ffn2 = h * (2 * c + 2) + 1;
    let ffn3 = h * 4 * c + h + (2 * ar_types + 1 + ac_types) * (h + 1);
    (ffn2, ffn3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slots_tile_the_buffer() {
        let l = Layout::new(&ModelConfig::default(), 10, 3, 2);
        let mut off = 0;
        for (_, s) in l.slots() {
            assert_eq!(s.offset, off);
            off += s.len();
        }
        assert_eq!(off, l.total());
        assert_eq!(l.dims.ctx_f + l.dims.ctx_b, 128);
    }

    #[test]
    fn init_is_seeded() {
        let l = Layout::new(&ModelConfig::default(), 10, 3, 2);
        let a: Vec<f64> = l.init(3);
        assert_eq!(a, l.init::<f64>(3));
        assert_ne!(a, l.init::<f64>(4));
        assert!(l.ffn3_b1.of(&a).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn counts_match_formula() {
        for h in [1, 150, 1500] {
            let cfg = ModelConfig {
                ffn_hidden: h,
                ..Default::default()
            };
            let c = ParamCounts::of(&Layout::new(&cfg, 50, 5, 2));
            assert_eq!((c.ffn2, c.ffn3), head_param_formula(h, 128, 5, 2));
        }
    }
}
