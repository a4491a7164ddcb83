//! Forward computations shared by the scoring session and the training pass.

use crate::linalg::{gemv, gemv_block, relu};
use crate::params::{Layout, SYM_BOS, SYM_CLOSE, SYM_COPY, SYM_OPEN};
use crate::scalar::Scalar;

/// The previous action as the decoder consumes it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Prev {
    Bos,
    /// Copy of the token at this index.
    Copy(usize),
    Open,
    /// AC type and link codes (`ar_type * 2 + direction`).
    Close {
        ac_type: usize,
        codes: Vec<usize>,
    },
}

pub struct Encoded<T> {
    pub ids: Vec<usize>,
    pub fwd: Vec<Vec<T>>,
    pub bwd: Vec<Vec<T>>,
    /// `[fwd; bwd]` per token.
    pub ctx: Vec<Vec<T>>,
}

impl<T: Scalar> Encoded<T> {
    pub fn len(&self) -> usize {
        self.ids.len()
    }
}

/// Boundary-side pre-activations of the two span heads, cached per `Open`.
#[derive(Debug, Clone)]
pub struct OpenProj<T> {
    pub ffn2: Vec<T>,
    pub ffn3: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct CloseHeads<T> {
    pub z2: Vec<T>,
    pub f2: T,
    /// FFN3 pre-activation without an antecedent.
    pub z3: Vec<T>,
    pub types: Vec<T>,
    pub null: T,
}

#[derive(Clone, Copy)]
pub struct Net<'a, T> {
    pub l: &'a Layout,
    pub p: &'a [T],
}

fn tanh_in_place<T: Scalar>(v: &mut [T]) {
    for x in v {
        *x = x.tanh();
    }
}

impl<'a, T: Scalar> Net<'a, T> {
    pub fn new(l: &'a Layout, p: &'a [T]) -> Self {
        Net { l, p }
    }

    fn rnn_step(
        &self,
        wx: crate::params::Slot,
        wh: crate::params::Slot,
        b: crate::params::Slot,
        e: &[T],
        prev: Option<&[T]>,
    ) -> Vec<T> {
        let n = wx.rows;
        let mut a = b.of(self.p).to_vec();
        gemv(wx.of(self.p), n, wx.cols, e, &mut a);
        if let Some(h) = prev {
            gemv(wh.of(self.p), n, n, h, &mut a);
        }
        tanh_in_place(&mut a);
        a
    }

    pub fn encode(&self, ids: &[usize]) -> Encoded<T> {
        let l = self.l;
        let n = ids.len();
        let emb = |i: usize| l.tok_emb.row(self.p, ids[i]);
        let mut fwd: Vec<Vec<T>> = Vec::with_capacity(n);
        for i in 0..n {
            let h = self.rnn_step(
                l.enc_f_x,
                l.enc_f_h,
                l.enc_f_b,
                emb(i),
                fwd.last().map(Vec::as_slice),
            );
            fwd.push(h);
        }
        let mut bwd: Vec<Vec<T>> = vec![Vec::new(); n];
        for i in (0..n).rev() {
            let prev = if i + 1 < n {
                Some(bwd[i + 1].as_slice())
            } else {
                None
            };
            bwd[i] = self.rnn_step(l.enc_b_x, l.enc_b_h, l.enc_b_b, emb(i), prev);
        }
        let ctx = fwd
            .iter()
            .zip(&bwd)
            .map(|(f, b)| f.iter().chain(b).copied().collect())
            .collect();
        Encoded {
            ids: ids.to_vec(),
            fwd,
            bwd,
            ctx,
        }
    }

    /// Decoder input: embedding of the previous action plus the context of
    /// the token under the cursor (nothing once the input is exhausted).
    pub fn input(&self, prev: &Prev, cursor: usize, enc: &Encoded<T>) -> Vec<T> {
        let l = self.l;
        let add = |x: &mut Vec<T>, v: &[T]| {
            for (a, b) in x.iter_mut().zip(v) {
                *a += *b;
            }
        };
        let mut x = match prev {
            Prev::Bos => l.sym_emb.row(self.p, SYM_BOS).to_vec(),
            Prev::Copy(t) => {
                let mut x = l.sym_emb.row(self.p, SYM_COPY).to_vec();
                add(&mut x, &enc.ctx[*t]);
                x
            }
            Prev::Open => l.sym_emb.row(self.p, SYM_OPEN).to_vec(),
            Prev::Close { ac_type, codes } => {
                let mut x = l.sym_emb.row(self.p, SYM_CLOSE).to_vec();
                add(&mut x, l.ac_emb.row(self.p, *ac_type));
                for &c in codes {
                    add(&mut x, l.ar_emb.row(self.p, c));
                }
                x
            }
        };
        if cursor < enc.len() {
            add(&mut x, &enc.ctx[cursor]);
        }
        x
    }

    pub fn cell(&self, x: &[T], prev: Option<&[T]>) -> Vec<T> {
        self.rnn_step(self.l.dec_x, self.l.dec_h, self.l.dec_b, x, prev)
    }

    /// Hidden pre-activation and the three structural scores
    /// (copy, open, close).
    pub fn ffn1(&self, h: &[T]) -> (Vec<T>, [T; 3]) {
        let l = self.l;
        let mut z = l.ffn1_b1.of(self.p).to_vec();
        gemv(l.ffn1_w1.of(self.p), l.dims.ffn1, l.dims.ctx, h, &mut z);
        let u = relu(&z);
        let mut out = [T::zero(); 3];
        out.copy_from_slice(l.ffn1_b2.of(self.p));
        gemv(l.ffn1_w2.of(self.p), 3, l.dims.ffn1, &u, &mut out);
        (z, out)
    }

    pub fn open_proj(&self, h_open: &[T]) -> OpenProj<T> {
        let l = self.l;
        let (hd, c) = (l.dims.hidden, l.dims.ctx);
        let mut ffn2 = vec![T::zero(); hd];
        gemv_block(l.ffn2_w1.of(self.p), hd, 2 * c, c, h_open, &mut ffn2);
        let mut ffn3 = vec![T::zero(); hd];
        gemv_block(l.ffn3_wp.of(self.p), hd, 2 * c, c, h_open, &mut ffn3);
        OpenProj { ffn2, ffn3 }
    }

    pub fn close_heads(&self, h: &[T], open: &OpenProj<T>) -> CloseHeads<T> {
        let l = self.l;
        let (hd, c) = (l.dims.hidden, l.dims.ctx);
        let mut z2 = l.ffn2_b1.of(self.p).to_vec();
        gemv_block(l.ffn2_w1.of(self.p), hd, 2 * c, 0, h, &mut z2);
        for (a, b) in z2.iter_mut().zip(&open.ffn2) {
            *a += *b;
        }
        let u2 = relu(&z2);
        let f2 = crate::linalg::dot(l.ffn2_w2.of(self.p), &u2) + l.ffn2_b2.of(self.p)[0];

        let mut z3 = l.ffn3_b1.of(self.p).to_vec();
        gemv_block(l.ffn3_wp.of(self.p), hd, 2 * c, 0, h, &mut z3);
        for (a, b) in z3.iter_mut().zip(&open.ffn3) {
            *a += *b;
        }
        let u3 = relu(&z3);
        let mut types = l.ffn3_type_b.of(self.p).to_vec();
        gemv(
            l.ffn3_type_w.of(self.p),
            l.dims.ac_types,
            hd,
            &u3,
            &mut types,
        );
        let null = crate::linalg::dot(l.ffn3_null_w.of(self.p), &u3) + l.ffn3_null_b.of(self.p)[0];
        CloseHeads {
            z2,
            f2,
            z3,
            types,
            null,
        }
    }

    /// Antecedent-side FFN3 pre-activation of a closed mention, from the
    /// decoder states at its `Close` and at its `Open`.
    pub fn mention_proj(&self, h_close: &[T], h_open: &[T]) -> Vec<T> {
        let l = self.l;
        let (hd, c) = (l.dims.hidden, l.dims.ctx);
        let mut a = vec![T::zero(); hd];
        gemv_block(l.ffn3_wa.of(self.p), hd, 2 * c, 0, h_close, &mut a);
        gemv_block(l.ffn3_wa.of(self.p), hd, 2 * c, c, h_open, &mut a);
        a
    }

    /// Pre-activation and link scores (one per code) for one antecedent.
    pub fn link(&self, z3: &[T], mention: &[T]) -> (Vec<T>, Vec<T>) {
        let l = self.l;
        let z: Vec<T> = z3.iter().zip(mention).map(|(a, b)| *a + *b).collect();
        let u = relu(&z);
        let mut out = l.ffn3_link_b.of(self.p).to_vec();
        gemv(
            l.ffn3_link_w.of(self.p),
            l.dims.link_codes,
            l.dims.hidden,
            &u,
            &mut out,
        );
        (z, out)
    }
}

/// Score of a `Close` candidate. `extra` is the link or null term in
/// single-link mode and zero otherwise.
#[inline]
pub fn close_score<T: Scalar>(
    f1: &[T; 3],
    heads: &CloseHeads<T>,
    ac_type: usize,
    extra: Option<T>,
) -> f64 {
    let mut s = f1[2] + heads.f2 + heads.types[ac_type];
    if let Some(e) = extra {
        s += e;
    }
    s.f64()
}
