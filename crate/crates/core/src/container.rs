//! Binary model files.
//!
//! Layout (little-endian): 8-byte magic, `u32` version, body, then the
//! SHA-256 of everything before it. Floats are stored as raw bits, so a
//! save/load round trip is exact.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{AedError, Result};
use crate::featnet::{FeatureVector, FilterBank, LrnParams, PcanetHyper, PcanetModel};
use crate::oneclass::KpcaModel;
use crate::pipeline::{AedModel, PipelineConfig};

pub const MODEL_MAGIC: &[u8; 8] = b"AEDMODEL";
pub const PCANET_MAGIC: &[u8; 8] = b"AEDPCANT";
pub const FORMAT_VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }

    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn usize(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u64).to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_bits().to_le_bytes());
    }

    fn f64s(&mut self, v: &[f64]) {
        self.usize(v.len());
        for &x in v {
            self.f64(x);
        }
    }

    fn str(&mut self, s: &str) {
        self.usize(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| AedError::Format("truncated file".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn usize(&mut self) -> Result<usize> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes"));
        usize::try_from(v).map_err(|_| AedError::Format(format!("length {v} out of range")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes"))))
    }

    fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.usize()?;
        if n > (self.buf.len() - self.pos) / 8 {
            return Err(AedError::Format("truncated file".into()));
        }
        (0..n).map(|_| self.f64()).collect()
    }

    fn str(&mut self) -> Result<String> {
        let n = self.usize()?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| AedError::Format("invalid utf-8 text".into()))
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(AedError::Format(format!("{} trailing bytes", self.buf.len() - self.pos)));
        }
        Ok(())
    }
}

fn seal(magic: &[u8; 8], body: Writer) -> Vec<u8> {
    let mut out = Vec::with_capacity(body.0.len() + 12 + DIGEST_LEN);
    out.extend_from_slice(magic);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&body.0);
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

fn unseal<'a>(magic: &[u8; 8], bytes: &'a [u8]) -> Result<Reader<'a>> {
    if bytes.len() < 12 + DIGEST_LEN || &bytes[..8] != magic {
        return Err(AedError::Format("not a model file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(AedError::Format(format!(
            "unsupported format version {version} (expected {FORMAT_VERSION})"
        )));
    }
    let (content, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
    if Sha256::digest(content).as_slice() != digest {
        return Err(AedError::Format("checksum mismatch; file is corrupted".into()));
    }
    Ok(Reader { buf: content, pos: 12 })
}

fn write_bank(w: &mut Writer, b: &FilterBank) {
    w.u8(b.stage);
    w.usize(b.k1);
    w.usize(b.k2);
    w.usize(b.channels);
    w.usize(b.filters.len());
    for f in &b.filters {
        w.f64s(f);
    }
    w.f64s(&b.eigenvalues);
}

fn read_bank(r: &mut Reader) -> Result<FilterBank> {
    let stage = r.u8()?;
    let (k1, k2, channels) = (r.usize()?, r.usize()?, r.usize()?);
    let n = r.usize()?;
    let mut filters = Vec::new();
    for _ in 0..n {
        let f = r.f64s()?;
        if f.len() != k1 * k2 * channels {
            return Err(AedError::Format("filter length does not match its kernel size".into()));
        }
        filters.push(f);
    }
    let eigenvalues = r.f64s()?;
    if eigenvalues.len() != n {
        return Err(AedError::Format("eigenvalue count does not match filter count".into()));
    }
    Ok(FilterBank {
        stage,
        k1,
        k2,
        channels,
        filters,
        eigenvalues,
    })
}

fn write_pcanet(w: &mut Writer, m: &PcanetModel) {
    let h = &m.hyper;
    for v in [h.k1, h.k2, h.l1, h.l2, h.block_h, h.block_w] {
        w.usize(v);
    }
    match &h.lrn {
        None => w.u8(0),
        Some(p) => {
            w.u8(1);
            w.f64(p.bias);
            w.f64(p.weight);
            w.usize(p.depth);
            w.f64(p.exponent);
        }
    }
    w.usize(m.input_h);
    w.usize(m.input_w);
    w.usize(m.channels);
    write_bank(w, &m.bank1);
    write_bank(w, &m.bank2);
}

fn read_pcanet(r: &mut Reader) -> Result<PcanetModel> {
    let mut dims = [0usize; 6];
    for d in &mut dims {
        *d = r.usize()?;
    }
    let lrn = match r.u8()? {
        0 => None,
        1 => Some(LrnParams {
            bias: r.f64()?,
            weight: r.f64()?,
            depth: r.usize()?,
            exponent: r.f64()?,
        }),
        t => return Err(AedError::Format(format!("bad LRN tag {t}"))),
    };
    let hyper = PcanetHyper {
        k1: dims[0],
        k2: dims[1],
        l1: dims[2],
        l2: dims[3],
        block_h: dims[4],
        block_w: dims[5],
        lrn,
    };
    let (input_h, input_w, channels) = (r.usize()?, r.usize()?, r.usize()?);
    hyper.validate(channels).map_err(|e| AedError::Format(format!("stored network: {e}")))?;
    let bank1 = read_bank(r)?;
    let bank2 = read_bank(r)?;
    if bank1.filters.len() != hyper.l1
        || bank2.filters.len() != hyper.l2
        || bank1.channels != channels
        || bank2.channels != 1
    {
        return Err(AedError::Format("filter banks do not match the stored hyperparameters".into()));
    }
    Ok(PcanetModel {
        hyper,
        input_h,
        input_w,
        channels,
        bank1,
        bank2,
    })
}

/// Histogram features are mostly zeros: store length plus `(index, value)`
/// for every entry whose bits are not `+0.0`.
fn write_sparse(w: &mut Writer, v: &[f64]) {
    w.usize(v.len());
    let nonzero: Vec<usize> = (0..v.len()).filter(|&i| v[i].to_bits() != 0).collect();
    w.usize(nonzero.len());
    for i in nonzero {
        w.u32(i as u32);
        w.f64(v[i]);
    }
}

fn read_sparse(r: &mut Reader) -> Result<Vec<f64>> {
    let len = r.usize()?;
    let count = r.usize()?;
    if count > len || count > (r.buf.len() - r.pos) / 12 {
        return Err(AedError::Format("corrupt sparse feature".into()));
    }
    let mut v = vec![0.0; len];
    let mut last = None;
    for _ in 0..count {
        let i = r.u32()? as usize;
        if i >= len || last.is_some_and(|l| i <= l) {
            return Err(AedError::Format("corrupt sparse feature index".into()));
        }
        v[i] = r.f64()?;
        last = Some(i);
    }
    Ok(v)
}

fn write_kpca(w: &mut Writer, m: &KpcaModel) {
    w.f64(m.sigma);
    w.usize(m.rank);
    w.f64(m.threshold);
    w.f64(m.grand_mean);
    w.usize(m.features.len());
    for f in &m.features {
        write_sparse(w, f.as_slice());
    }
    w.usize(m.alphas.len());
    for a in &m.alphas {
        w.f64s(a);
    }
    w.f64s(&m.lambdas);
    w.f64s(&m.col_means);
}

fn read_kpca(r: &mut Reader) -> Result<KpcaModel> {
    let sigma = r.f64()?;
    let rank = r.usize()?;
    let threshold = r.f64()?;
    let grand_mean = r.f64()?;
    let n = r.usize()?;
    let mut features = Vec::new();
    for _ in 0..n {
        features.push(FeatureVector::new(read_sparse(r)?).map_err(|e| AedError::Format(format!("stored feature: {e}")))?);
    }
    let q = r.usize()?;
    let mut alphas = Vec::new();
    for _ in 0..q {
        alphas.push(r.f64s()?);
    }
    let lambdas = r.f64s()?;
    let col_means = r.f64s()?;
    let dim = features.first().map_or(0, |f| f.len());
    if features.iter().any(|f| f.len() != dim)
        || alphas.iter().any(|a| a.len() != n)
        || lambdas.len() != q
        || col_means.len() != n
        || q > rank
    {
        return Err(AedError::Format("inconsistent kernel-PCA section".into()));
    }
    Ok(KpcaModel {
        features,
        sigma,
        alphas,
        lambdas,
        col_means,
        grand_mean,
        threshold,
        rank,
    })
}

impl PcanetModel {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        write_pcanet(&mut w, self);
        seal(PCANET_MAGIC, w)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = unseal(PCANET_MAGIC, bytes)?;
        let m = read_pcanet(&mut r)?;
        r.finish()?;
        Ok(m)
    }
}

impl AedModel {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.str(&self.config.to_text());
        w.f64(self.flow_magnitude_cap);
        w.usize(self.frame_h);
        w.usize(self.frame_w);
        write_pcanet(&mut w, &self.pcanet);
        write_kpca(&mut w, &self.kpca);
        seal(MODEL_MAGIC, w)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = unseal(MODEL_MAGIC, bytes)?;
        let config = PipelineConfig::from_text(&r.str()?)?;
        let flow_magnitude_cap = r.f64()?;
        let frame_h = r.usize()?;
        let frame_w = r.usize()?;
        let pcanet = read_pcanet(&mut r)?;
        let kpca = read_kpca(&mut r)?;
        r.finish()?;
        if pcanet.hyper != config.pcanet
            || kpca.sigma != config.kpca.sigma
            || kpca.alphas.len() != config.kpca.q
            || kpca.features.first().map_or(0, |f| f.len()) != pcanet.feature_len()
        {
            return Err(AedError::Format("model sections disagree with the stored config".into()));
        }
        if !(flow_magnitude_cap > 0.0 && flow_magnitude_cap.is_finite()) {
            return Err(AedError::Format(format!("bad magnitude cap {flow_magnitude_cap}")));
        }
        Ok(AedModel {
            config,
            pcanet,
            kpca,
            flow_magnitude_cap,
            frame_h,
            frame_w,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}
