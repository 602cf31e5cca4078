//! Little-endian binary encodings. Every count that sizes a payload is
//! checked against the input length before any array is read, and the input
//! must be consumed exactly.

use super::{
    Dataset, GnbModel, KMeansState, KernelKind, KnnModel, LinearKind, LinearModel, Model, ModelError, RfModel, Tree,
};

pub const MODEL_MAGIC: [u8; 4] = *b"NML1";
pub const DATASET_MAGIC: [u8; 4] = *b"NDS1";
pub const FORMAT_VERSION: u8 = 1;

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(ModelError::LengthMismatch {
            expected: self.pos as u64 + n as u64,
            actual: self.bytes.len() as u64,
        })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8, ModelError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, ModelError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn count(&mut self) -> Result<usize, ModelError> {
        Ok(self.u32()? as usize)
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>, ModelError> {
        Ok(self
            .take(n * 4)?
            .chunks_exact(4)
            .map(|c| f32::from_bits(u32::from_le_bytes(c.try_into().unwrap())))
            .collect())
    }

    fn i32s(&mut self, n: usize) -> Result<Vec<i32>, ModelError> {
        Ok(self.take(n * 4)?.chunks_exact(4).map(|c| i32::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn u32s(&mut self, n: usize) -> Result<Vec<u32>, ModelError> {
        Ok(self.take(n * 4)?.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn u16s(&mut self, n: usize) -> Result<Vec<u16>, ModelError> {
        Ok(self.take(n * 2)?.chunks_exact(2).map(|c| u16::from_le_bytes(c.try_into().unwrap())).collect())
    }

    /// Fails unless exactly `payload` bytes remain after the current position.
    fn expect_remaining(&self, payload: Option<u64>) -> Result<(), ModelError> {
        let actual = self.bytes.len() as u64;
        match payload.and_then(|p| p.checked_add(self.pos as u64)) {
            Some(expected) if expected == actual => Ok(()),
            Some(expected) => Err(ModelError::LengthMismatch { expected, actual }),
            None => Err(ModelError::LengthMismatch { expected: u64::MAX, actual }),
        }
    }

    fn finish(&self) -> Result<(), ModelError> {
        if self.pos != self.bytes.len() {
            return Err(ModelError::LengthMismatch { expected: self.pos as u64, actual: self.bytes.len() as u64 });
        }
        Ok(())
    }
}

/// Checked `sum(words[i].0 * words[i].1) * unit` in bytes.
fn payload_bytes(terms: &[(usize, usize, u64)]) -> Option<u64> {
    terms.iter().try_fold(0u64, |acc, &(a, b, unit)| {
        (a as u64).checked_mul(b as u64)?.checked_mul(unit).and_then(|t| acc.checked_add(t))
    })
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }

    fn u32(&mut self, v: usize) {
        let v = u32::try_from(v).expect("count exceeds u32 range");
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn f32s(&mut self, v: &[f32]) {
        v.iter().for_each(|x| self.0.extend_from_slice(&x.to_bits().to_le_bytes()));
    }

    fn i32s(&mut self, v: &[i32]) {
        v.iter().for_each(|x| self.0.extend_from_slice(&x.to_le_bytes()));
    }

    fn u32s(&mut self, v: &[u32]) {
        v.iter().for_each(|x| self.0.extend_from_slice(&x.to_le_bytes()));
    }

    fn u16s(&mut self, v: &[u16]) {
        v.iter().for_each(|x| self.0.extend_from_slice(&x.to_le_bytes()));
    }
}

fn read_header(r: &mut Reader<'_>, magic: [u8; 4]) -> Result<(), ModelError> {
    let found: [u8; 4] = match r.take(4) {
        Ok(m) => m.try_into().unwrap(),
        Err(_) => {
            let mut short = [0u8; 4];
            short[..r.bytes.len()].copy_from_slice(r.bytes);
            return Err(ModelError::BadMagic(short));
        }
    };
    if found != magic {
        return Err(ModelError::BadMagic(found));
    }
    let version = r.u8()?;
    if version != FORMAT_VERSION {
        return Err(ModelError::UnsupportedVersion(version));
    }
    Ok(())
}

pub fn load_model(bytes: &[u8]) -> Result<Model, ModelError> {
    let mut r = Reader::new(bytes);
    read_header(&mut r, MODEL_MAGIC)?;
    let kind = KernelKind::from_id(r.u8()?)?;
    let model = match kind {
        KernelKind::Lr | KernelKind::Svm => {
            let rows = r.count()?;
            let d = r.count()?;
            r.expect_remaining(payload_bytes(&[(rows, d, 4), (rows, 1, 4)]))?;
            let weights = r.f32s(rows * d)?;
            let bias = r.f32s(rows)?;
            let kind = if kind == KernelKind::Lr { LinearKind::Lr } else { LinearKind::Svm };
            Model::Linear(LinearModel::new(kind, rows, d, weights, bias)?)
        }
        KernelKind::Gnb => {
            let n_class = r.count()?;
            let d = r.count()?;
            r.expect_remaining(payload_bytes(&[(n_class, d, 12), (n_class, 1, 4)]))?;
            let mu = r.f32s(n_class * d)?;
            let sigma2 = r.f32s(n_class * d)?;
            let log_prior = r.f32s(n_class)?;
            let log_norm = r.f32s(n_class * d)?;
            Model::Gnb(GnbModel::new(n_class, d, mu, sigma2, log_prior, log_norm)?)
        }
        KernelKind::Knn => {
            let n = r.count()?;
            let d = r.count()?;
            let n_class = r.count()?;
            let k = r.count()?;
            r.expect_remaining(payload_bytes(&[(n, d, 4), (n, 1, 4)]))?;
            let features = r.f32s(n * d)?;
            let labels = r
                .i32s(n)?
                .into_iter()
                .map(|l| {
                    u16::try_from(l).map_err(|_| ModelError::InvariantViolation(format!("label {l} out of range")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Model::Knn(KnnModel::new(Dataset::new(n, d, n_class, features, Some(labels))?, k)?)
        }
        KernelKind::KMeans => {
            let k = r.count()?;
            let d = r.count()?;
            let n_assign = r.count()?;
            let max_iters = r.u32()?;
            r.expect_remaining(payload_bytes(&[(1, 1, 4), (k, d, 4), (n_assign, 1, 4)]))?;
            let epsilon = r.f32s(1)?[0];
            let centroids = r.f32s(k * d)?;
            let assignments = r.u32s(n_assign)?;
            Model::KMeans(KMeansState::new(k, d, centroids, assignments, epsilon, max_iters)?)
        }
        KernelKind::Rf => {
            let n_trees = r.count()?;
            let n_class = r.count()?;
            let d = r.count()?;
            let total_nodes = r.count()?;
            r.expect_remaining(payload_bytes(&[(n_trees, 1, 4), (total_nodes, 1, 16)]))?;
            let counts = r.u32s(n_trees)?;
            let sum: u64 = counts.iter().map(|&c| u64::from(c)).sum();
            if sum != total_nodes as u64 {
                return Err(ModelError::InvariantViolation(format!(
                    "per-tree node counts sum to {sum}, header says {total_nodes}"
                )));
            }
            let mut trees = Vec::with_capacity(n_trees);
            for &n in &counts {
                let n = n as usize;
                let feature = r.i32s(n)?;
                let threshold = r.f32s(n)?;
                let left = r.i32s(n)?;
                let right = r.i32s(n)?;
                trees.push(Tree::new(feature, threshold, left, right));
            }
            Model::Rf(RfModel::new(n_class, d, trees)?)
        }
    };
    r.finish()?;
    Ok(model)
}

pub fn save_model(model: &Model) -> Vec<u8> {
    let mut w = Writer::default();
    w.0.extend_from_slice(&MODEL_MAGIC);
    w.u8(FORMAT_VERSION);
    w.u8(model.kind().id());
    match model {
        Model::Linear(m) => {
            w.u32(m.rows());
            w.u32(m.d());
            w.f32s(m.weights());
            w.f32s(m.bias());
        }
        Model::Gnb(m) => {
            w.u32(m.n_class());
            w.u32(m.d());
            w.f32s(m.mu());
            w.f32s(m.sigma2());
            w.f32s(m.log_prior());
            w.f32s(m.log_norm());
        }
        Model::Knn(m) => {
            let t = m.train();
            w.u32(t.n_samples());
            w.u32(t.d());
            w.u32(t.n_class());
            w.u32(m.k());
            w.f32s(t.features());
            let labels: Vec<i32> = m.train_labels().iter().map(|&l| i32::from(l)).collect();
            w.i32s(&labels);
        }
        Model::KMeans(s) => {
            w.u32(s.k());
            w.u32(s.d());
            w.u32(s.assignments().len());
            w.u32(s.max_iters() as usize);
            w.f32s(&[s.epsilon()]);
            w.f32s(s.centroids());
            w.u32s(s.assignments());
        }
        Model::Rf(m) => {
            w.u32(m.n_trees());
            w.u32(m.n_class());
            w.u32(m.d());
            w.u32(m.trees().iter().map(Tree::n_nodes).sum());
            for t in m.trees() {
                w.u32(t.n_nodes());
            }
            for t in m.trees() {
                w.i32s(&t.feature);
                w.f32s(&t.threshold);
                w.i32s(&t.left);
                w.i32s(&t.right);
            }
        }
    }
    w.0
}

pub fn load_dataset(bytes: &[u8]) -> Result<Dataset, ModelError> {
    let mut r = Reader::new(bytes);
    read_header(&mut r, DATASET_MAGIC)?;
    let has_labels = match r.u8()? {
        0 => false,
        1 => true,
        other => return Err(ModelError::InvariantViolation(format!("has_labels flag {other} is not 0 or 1"))),
    };
    let n = r.count()?;
    let d = r.count()?;
    let n_class = r.count()?;
    let label_bytes = if has_labels { 2 } else { 0 };
    r.expect_remaining(payload_bytes(&[(n, d, 4), (n, 1, label_bytes)]))?;
    let features = r.f32s(n * d)?;
    let labels = if has_labels { Some(r.u16s(n)?) } else { None };
    r.finish()?;
    Dataset::new(n, d, n_class, features, labels)
}

pub fn save_dataset(ds: &Dataset) -> Vec<u8> {
    let mut w = Writer::default();
    w.0.extend_from_slice(&DATASET_MAGIC);
    w.u8(FORMAT_VERSION);
    w.u8(u8::from(ds.labels().is_some()));
    w.u32(ds.n_samples());
    w.u32(ds.d());
    w.u32(ds.n_class());
    w.f32s(ds.features());
    if let Some(l) = ds.labels() {
        w.u16s(l);
    }
    w.0
}
