//! Teacher-forced loss and its gradient.

use std::collections::BTreeMap;

use argseq_core::actions::Candidate;

use crate::example::{link_code, Example};
use crate::linalg::{axpy, gemv_t, gemv_t_block, ger, ger_block, relu, relu_back};
use crate::net::{close_score, CloseHeads, Encoded, Net, OpenProj, Prev};
use crate::params::{Layout, SYM_BOS, SYM_CLOSE, SYM_COPY, SYM_OPEN};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassOutput {
    pub loss: f64,
    /// Hash of the sign pattern of every rectifier input; equal signatures
    /// mean the loss is smooth between the two parameter settings.
    pub relu_signature: u64,
}

#[derive(Default)]
struct Sig(u64);

impl Sig {
    fn new() -> Self {
        Sig(0xcbf29ce484222325)
    }

    fn mix<T: Scalar>(&mut self, z: &[T]) {
        for &v in z {
            self.0 = (self.0 ^ u64::from(v > T::zero())).wrapping_mul(0x100000001b3);
        }
    }
}

fn softplus(s: f64) -> f64 {
    s.max(0.0) + (-s.abs()).exp().ln_1p()
}

fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// Per-step values the backward pass needs.
struct StepHeads<T> {
    z1: Option<Vec<T>>,
    close: Option<(usize, CloseHeads<T>)>,
    links: BTreeMap<usize, (Vec<T>, Vec<T>)>,
}

/// Loss of one example; with `grad`, also adds its gradient.
pub fn run<T: Scalar>(l: &Layout, p: &[T], ex: &Example, mut grad: Option<&mut [T]>) -> PassOutput {
    let net = Net::new(l, p);
    let enc = net.encode(&ex.ids);
    let c = l.dims.ctx;
    let steps = ex.steps.len();

    let mut sig = Sig::new();
    let mut loss = 0.0f64;
    let mut xs: Vec<Vec<T>> = Vec::with_capacity(steps);
    let mut hs: Vec<Vec<T>> = Vec::with_capacity(steps);
    let mut opens: BTreeMap<usize, OpenProj<T>> = BTreeMap::new();
    // Close step -> (boundary, antecedent-side projection).
    let mut mentions: BTreeMap<usize, (usize, Vec<T>)> = BTreeMap::new();

    let mut dh: Vec<Vec<T>> = Vec::new();
    let mut d_open2: BTreeMap<usize, Vec<T>> = BTreeMap::new();
    let mut d_open3: BTreeMap<usize, Vec<T>> = BTreeMap::new();
    let mut d_mention: BTreeMap<usize, Vec<T>> = BTreeMap::new();
    if grad.is_some() {
        dh = vec![vec![T::zero(); c]; steps];
    }

    for (n, st) in ex.steps.iter().enumerate() {
        let x = net.input(&st.prev, st.cursor, &enc);
        let h = net.cell(&x, hs.last().map(Vec::as_slice));
        xs.push(x);
        hs.push(h);
        let h = &hs[n];

        let joint = st.candidates.len() > 1;
        let boundary = st.candidates.iter().find_map(|c| match c {
            Candidate::Close { boundary, .. } => Some(*boundary),
            _ => None,
        });
        let need_close = (joint && boundary.is_some()) || !st.links.is_empty();
        let mut heads = StepHeads {
            z1: None,
            close: None,
            links: BTreeMap::new(),
        };
        let mut f1 = [T::zero(); 3];
        if joint {
            let (z1, out) = net.ffn1(h);
            sig.mix(&z1);
            f1 = out;
            heads.z1 = Some(z1);
        }
        if need_close {
            let b = boundary.expect("link targets only at close steps");
            let ch = net.close_heads(h, &opens[&b]);
            sig.mix(&ch.z2);
            sig.mix(&ch.z3);
            heads.close = Some((b, ch));
        }
        let link_out = |q: usize, heads: &mut StepHeads<T>, sig: &mut Sig| -> Vec<T> {
            let z3 = &heads.close.as_ref().expect("close heads computed").1.z3;
            heads
                .links
                .entry(q)
                .or_insert_with(|| {
                    let r = net.link(z3, &mentions[&q].1);
                    sig.mix(&r.0);
                    r
                })
                .1
                .clone()
        };

        // Joint softmax over the legal set.
        let mut g_scores: Vec<f64> = Vec::new();
        if joint {
            let mut scores = Vec::with_capacity(st.candidates.len());
            for cand in &st.candidates {
                let s = match *cand {
                    Candidate::Copy => f1[0].f64(),
                    Candidate::Open => f1[1].f64(),
                    Candidate::Close { ac_type, link, .. } => {
                        let extra = match (ex.single_link, link) {
                            (false, _) => None,
                            (true, None) => Some(heads.close.as_ref().unwrap().1.null),
                            (true, Some(lc)) => {
                                Some(link_out(lc.antecedent, &mut heads, &mut sig)[link_code(&lc)])
                            }
                        };
                        close_score(&f1, &heads.close.as_ref().unwrap().1, ac_type, extra)
                    }
                };
                scores.push(s);
            }
            let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = scores.iter().map(|s| (s - m).exp()).collect();
            let z: f64 = exps.iter().sum();
            loss -= scores[st.gold] - m - z.ln();
            g_scores = exps.iter().map(|e| e / z).collect();
            g_scores[st.gold] -= 1.0;
        }

        // Independent link decisions against the null score.
        let mut g_links: Vec<f64> = Vec::with_capacity(st.links.len());
        for (lc, target) in &st.links {
            let out = link_out(lc.antecedent, &mut heads, &mut sig);
            let null = heads.close.as_ref().unwrap().1.null;
            let s = (out[link_code(lc)] - null).f64();
            let y = if *target { 1.0 } else { 0.0 };
            loss += softplus(s) - y * s;
            g_links.push(sigmoid(s) - y);
        }

        if let Some(g) = grad.as_deref_mut() {
            backward_heads(
                l,
                p,
                g,
                st,
                ex.single_link,
                h,
                &heads,
                &g_scores,
                &g_links,
                &mut dh[n],
                &mut d_open2,
                &mut d_open3,
                &mut d_mention,
            );
        }

        match st.gold_candidate() {
            Candidate::Open => {
                opens.insert(n, net.open_proj(h));
            }
            Candidate::Close { boundary, .. } => {
                mentions.insert(n, (boundary, net.mention_proj(h, &hs[boundary])));
            }
            Candidate::Copy => {}
        }
    }

    if let Some(g) = grad {
        backward_trunk(
            l, p, g, ex, &enc, &xs, &hs, dh, d_open2, d_open3, d_mention, &mentions,
        );
    }
    PassOutput {
        loss,
        relu_signature: sig.0,
    }
}

fn cast<T: Scalar>(v: &[f64]) -> Vec<T> {
    v.iter().map(|&x| T::of(x)).collect()
}

#[allow(clippy::too_many_arguments)]
fn backward_heads<T: Scalar>(
    l: &Layout,
    p: &[T],
    g: &mut [T],
    st: &crate::example::GoldStep,
    single: bool,
    h: &[T],
    heads: &StepHeads<T>,
    g_scores: &[f64],
    g_links: &[f64],
    dh: &mut [T],
    d_open2: &mut BTreeMap<usize, Vec<T>>,
    d_open3: &mut BTreeMap<usize, Vec<T>>,
    d_mention: &mut BTreeMap<usize, Vec<T>>,
) {
    let d = l.dims;
    let (c, hd) = (d.ctx, d.hidden);

    let mut gf1 = [0.0f64; 3];
    let mut gf2 = 0.0f64;
    let mut gtype = vec![0.0f64; d.ac_types];
    let mut gnull = 0.0f64;
    let mut glink: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (cand, &gs) in st.candidates.iter().zip(g_scores) {
        match *cand {
            Candidate::Copy => gf1[0] += gs,
            Candidate::Open => gf1[1] += gs,
            Candidate::Close { ac_type, link, .. } => {
                gf1[2] += gs;
                gf2 += gs;
                gtype[ac_type] += gs;
                if single {
                    match link {
                        None => gnull += gs,
                        Some(lc) => {
                            glink
                                .entry(lc.antecedent)
                                .or_insert_with(|| vec![0.0; d.link_codes])[link_code(&lc)] += gs
                        }
                    }
                }
            }
        }
    }
    for ((lc, _), &gl) in st.links.iter().zip(g_links) {
        glink
            .entry(lc.antecedent)
            .or_insert_with(|| vec![0.0; d.link_codes])[link_code(lc)] += gl;
        gnull -= gl;
    }

    if let Some(z1) = &heads.z1 {
        let gf1: Vec<T> = cast(&gf1);
        let u1 = relu(z1);
        axpy(T::one(), &gf1, l.ffn1_b2.of_mut(g));
        ger(l.ffn1_w2.of_mut(g), 3, d.ffn1, &gf1, &u1);
        let mut dz1 = vec![T::zero(); d.ffn1];
        gemv_t(l.ffn1_w2.of(p), 3, d.ffn1, &gf1, &mut dz1);
        relu_back(z1, &mut dz1);
        axpy(T::one(), &dz1, l.ffn1_b1.of_mut(g));
        ger(l.ffn1_w1.of_mut(g), d.ffn1, c, &dz1, h);
        gemv_t(l.ffn1_w1.of(p), d.ffn1, c, &dz1, dh);
    }

    let Some((b, ch)) = &heads.close else {
        return;
    };

    if gf2 != 0.0 {
        let gf2 = T::of(gf2);
        let u2 = relu(&ch.z2);
        axpy(gf2, &u2, l.ffn2_w2.of_mut(g));
        l.ffn2_b2.of_mut(g)[0] += gf2;
        let mut dz2: Vec<T> = l.ffn2_w2.of(p).iter().map(|&w| w * gf2).collect();
        relu_back(&ch.z2, &mut dz2);
        axpy(T::one(), &dz2, l.ffn2_b1.of_mut(g));
        ger_block(l.ffn2_w1.of_mut(g), hd, 2 * c, 0, &dz2, h);
        gemv_t_block(l.ffn2_w1.of(p), hd, 2 * c, 0, &dz2, dh);
        let acc = d_open2.entry(*b).or_insert_with(|| vec![T::zero(); hd]);
        axpy(T::one(), &dz2, acc);
    }

    let gtype: Vec<T> = cast(&gtype);
    let gnull = T::of(gnull);
    let u3 = relu(&ch.z3);
    let mut dz3 = vec![T::zero(); hd];
    gemv_t(l.ffn3_type_w.of(p), d.ac_types, hd, &gtype, &mut dz3);
    ger(l.ffn3_type_w.of_mut(g), d.ac_types, hd, &gtype, &u3);
    axpy(T::one(), &gtype, l.ffn3_type_b.of_mut(g));
    axpy(gnull, l.ffn3_null_w.of(p), &mut dz3);
    axpy(gnull, &u3, l.ffn3_null_w.of_mut(g));
    l.ffn3_null_b.of_mut(g)[0] += gnull;
    relu_back(&ch.z3, &mut dz3);

    for (q, gl) in &glink {
        let gl: Vec<T> = cast(gl);
        let zq = &heads.links[q].0;
        let uq = relu(zq);
        ger(l.ffn3_link_w.of_mut(g), d.link_codes, hd, &gl, &uq);
        axpy(T::one(), &gl, l.ffn3_link_b.of_mut(g));
        let mut dzq = vec![T::zero(); hd];
        gemv_t(l.ffn3_link_w.of(p), d.link_codes, hd, &gl, &mut dzq);
        relu_back(zq, &mut dzq);
        axpy(T::one(), &dzq, &mut dz3);
        let acc = d_mention.entry(*q).or_insert_with(|| vec![T::zero(); hd]);
        axpy(T::one(), &dzq, acc);
    }

    axpy(T::one(), &dz3, l.ffn3_b1.of_mut(g));
    ger_block(l.ffn3_wp.of_mut(g), hd, 2 * c, 0, &dz3, h);
    gemv_t_block(l.ffn3_wp.of(p), hd, 2 * c, 0, &dz3, dh);
    let acc = d_open3.entry(*b).or_insert_with(|| vec![T::zero(); hd]);
    axpy(T::one(), &dz3, acc);
}

#[allow(clippy::too_many_arguments)]
fn backward_trunk<T: Scalar>(
    l: &Layout,
    p: &[T],
    g: &mut [T],
    ex: &Example,
    enc: &Encoded<T>,
    xs: &[Vec<T>],
    hs: &[Vec<T>],
    mut dh: Vec<Vec<T>>,
    d_open2: BTreeMap<usize, Vec<T>>,
    d_open3: BTreeMap<usize, Vec<T>>,
    d_mention: BTreeMap<usize, Vec<T>>,
    mentions: &BTreeMap<usize, (usize, Vec<T>)>,
) {
    let d = l.dims;
    let (c, hd) = (d.ctx, d.hidden);

    for (b, dz) in &d_open2 {
        ger_block(l.ffn2_w1.of_mut(g), hd, 2 * c, c, dz, &hs[*b]);
        gemv_t_block(l.ffn2_w1.of(p), hd, 2 * c, c, dz, &mut dh[*b]);
    }
    for (b, dz) in &d_open3 {
        ger_block(l.ffn3_wp.of_mut(g), hd, 2 * c, c, dz, &hs[*b]);
        gemv_t_block(l.ffn3_wp.of(p), hd, 2 * c, c, dz, &mut dh[*b]);
    }
    for (q, dz) in &d_mention {
        let b = mentions[q].0;
        ger_block(l.ffn3_wa.of_mut(g), hd, 2 * c, 0, dz, &hs[*q]);
        ger_block(l.ffn3_wa.of_mut(g), hd, 2 * c, c, dz, &hs[b]);
        gemv_t_block(l.ffn3_wa.of(p), hd, 2 * c, 0, dz, &mut dh[*q]);
        gemv_t_block(l.ffn3_wa.of(p), hd, 2 * c, c, dz, &mut dh[b]);
    }

    // Decoder, back through time.
    let n_tok = enc.len();
    let mut dctx = vec![vec![T::zero(); c]; n_tok];
    let mut carry = vec![T::zero(); c];
    for n in (0..ex.steps.len()).rev() {
        let mut da: Vec<T> = dh[n].iter().zip(&carry).map(|(a, b)| *a + *b).collect();
        for (v, &hv) in da.iter_mut().zip(&hs[n]) {
            *v *= T::one() - hv * hv;
        }
        axpy(T::one(), &da, l.dec_b.of_mut(g));
        ger(l.dec_x.of_mut(g), c, c, &da, &xs[n]);
        carry.iter_mut().for_each(|v| *v = T::zero());
        if n > 0 {
            ger(l.dec_h.of_mut(g), c, c, &da, &hs[n - 1]);
            gemv_t(l.dec_h.of(p), c, c, &da, &mut carry);
        }
        let mut dx = vec![T::zero(); c];
        gemv_t(l.dec_x.of(p), c, c, &da, &mut dx);

        let st = &ex.steps[n];
        match &st.prev {
            Prev::Bos => axpy(T::one(), &dx, l.sym_emb.row_mut(g, SYM_BOS)),
            Prev::Copy(t) => {
                axpy(T::one(), &dx, l.sym_emb.row_mut(g, SYM_COPY));
                axpy(T::one(), &dx, &mut dctx[*t]);
            }
            Prev::Open => axpy(T::one(), &dx, l.sym_emb.row_mut(g, SYM_OPEN)),
            Prev::Close { ac_type, codes } => {
                axpy(T::one(), &dx, l.sym_emb.row_mut(g, SYM_CLOSE));
                axpy(T::one(), &dx, l.ac_emb.row_mut(g, *ac_type));
                for &code in codes {
                    axpy(T::one(), &dx, l.ar_emb.row_mut(g, code));
                }
            }
        }
        if st.cursor < n_tok {
            axpy(T::one(), &dx, &mut dctx[st.cursor]);
        }
    }

    // Encoder: forward direction runs back from the last token, backward
    // direction from the first.
    let (cf, cb, e) = (d.ctx_f, d.ctx_b, d.embed);
    let mut demb = vec![vec![T::zero(); e]; n_tok];
    let mut carry = vec![T::zero(); cf];
    for i in (0..n_tok).rev() {
        let mut da: Vec<T> = dctx[i][..cf]
            .iter()
            .zip(&carry)
            .map(|(a, b)| *a + *b)
            .collect();
        for (v, &hv) in da.iter_mut().zip(&enc.fwd[i]) {
            *v *= T::one() - hv * hv;
        }
        axpy(T::one(), &da, l.enc_f_b.of_mut(g));
        ger(
            l.enc_f_x.of_mut(g),
            cf,
            e,
            &da,
            l.tok_emb.row(p, enc.ids[i]),
        );
        gemv_t(l.enc_f_x.of(p), cf, e, &da, &mut demb[i]);
        carry.iter_mut().for_each(|v| *v = T::zero());
        if i > 0 {
            ger(l.enc_f_h.of_mut(g), cf, cf, &da, &enc.fwd[i - 1]);
            gemv_t(l.enc_f_h.of(p), cf, cf, &da, &mut carry);
        }
    }
    let mut carry = vec![T::zero(); cb];
    for i in 0..n_tok {
        let mut da: Vec<T> = dctx[i][cf..]
            .iter()
            .zip(&carry)
            .map(|(a, b)| *a + *b)
            .collect();
        for (v, &hv) in da.iter_mut().zip(&enc.bwd[i]) {
            *v *= T::one() - hv * hv;
        }
        axpy(T::one(), &da, l.enc_b_b.of_mut(g));
        ger(
            l.enc_b_x.of_mut(g),
            cb,
            e,
            &da,
            l.tok_emb.row(p, enc.ids[i]),
        );
        gemv_t(l.enc_b_x.of(p), cb, e, &da, &mut demb[i]);
        carry.iter_mut().for_each(|v| *v = T::zero());
        if i + 1 < n_tok {
            ger(l.enc_b_h.of_mut(g), cb, cb, &da, &enc.bwd[i + 1]);
            gemv_t(l.enc_b_h.of(p), cb, cb, &da, &mut carry);
        }
    }
    for (i, de) in demb.iter().enumerate() {
        axpy(T::one(), de, l.tok_emb.row_mut(g, enc.ids[i]));
    }
}
