use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::mlp::{Masks, ProbeMlp, Shape, Workspace};
use crate::corpus::SeedSpec;
use crate::embeddings::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::probedata::{token_len, ProbeDataset, ProbeExample};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub h1: usize,
    pub h2: usize,
    pub dropout: f64,
    pub seed: SeedSpec,
}

impl TrainConfig {
    pub fn new(seed: SeedSpec) -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 3,
            batch_size: 64,
            h1: 256,
            h2: 128,
            dropout: 0.1,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || !(self.learning_rate > 0.0) {
            return Err(Error::InvalidArgument("epochs, batch size and learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidArgument(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        Ok(())
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f32], grad: &[f32], cfg: &TrainConfig) {
        self.t += 1;
        let bc1 = 1.0 - cfg.beta1.powi(self.t);
        let bc2 = 1.0 - cfg.beta2.powi(self.t);
        for i in 0..params.len() {
            let g = grad[i] as f64;
            self.m[i] = cfg.beta1 * self.m[i] + (1.0 - cfg.beta1) * g;
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * g * g;
            let update = cfg.learning_rate * (self.m[i] / bc1) / ((self.v[i] / bc2).sqrt() + cfg.epsilon);
            params[i] -= update as f32;
        }
    }
}

fn check_ids(emb: &EmbeddingMatrix, data: &ProbeDataset) -> Result<()> {
    match data.examples.iter().find(|e| e.token_id as usize >= emb.vocab_size()) {
        Some(e) => Err(Error::IdOutOfRange {
            id: e.token_id,
            vocab_size: emb.vocab_size(),
        }),
        None => Ok(()),
    }
}

/// Trains a fresh probe on `data`. Initialization uses stream 0 of
/// `cfg.seed`, batch order and dropout stream 1.
pub fn train_probe(emb: &EmbeddingMatrix, data: &ProbeDataset, cfg: &TrainConfig) -> Result<ProbeMlp<f32>> {
    cfg.validate()?;
    check_ids(emb, data)?;
    if data.is_empty() {
        return Err(Error::Empty("probe training set"));
    }
    let shape = Shape {
        dim: emb.dim(),
        h1: cfg.h1,
        h2: cfg.h2,
    };
    let mut model = ProbeMlp::<f32>::init(shape, &mut cfg.seed.stream(0));
    let mut rng = cfg.seed.stream(1);
    let mut adam = Adam::new(model.params.len());
    let mut ws = Workspace::new(shape);
    let mut grad = vec![0f32; model.params.len()];
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut batch_index = 0;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f32;
            let mut loss = 0f32;
            for &i in batch {
                let ex = &data.examples[i];
                let x = emb.row(ex.token_id);
                let masks = (cfg.dropout > 0.0).then(|| Masks::draw(shape, cfg.dropout, &mut rng));
                let logit = model.forward(x, masks.as_ref(), &mut ws);
                loss += model.backward(x, ex.label, logit, masks.as_ref(), &mut ws, scale, &mut grad) * scale;
            }
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { batch: batch_index });
            }
            adam.step(&mut model.params, &grad, cfg);
            batch_index += 1;
        }
    }
    Ok(model)
}

/// Logit > 0, i.e. sigmoid > 0.5; an exact tie predicts negative.
pub fn predict(model: &ProbeMlp<f32>, emb: &EmbeddingMatrix, examples: &[ProbeExample]) -> Result<Vec<bool>> {
    let mut ws = Workspace::new(model.shape);
    examples
        .iter()
        .map(|e| {
            if e.token_id as usize >= emb.vocab_size() {
                return Err(Error::IdOutOfRange {
                    id: e.token_id,
                    vocab_size: emb.vocab_size(),
                });
            }
            Ok(model.forward(emb.row(e.token_id), None, &mut ws) > 0.0)
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalCounts {
    pub correct: u64,
    pub total: u64,
    pub per_char: BTreeMap<char, (u64, u64)>,
}

impl EvalCounts {
    pub fn for_char(alpha: char, correct: u64, total: u64) -> Self {
        EvalCounts {
            correct,
            total,
            per_char: BTreeMap::from([(alpha, (correct, total))]),
        }
    }

    pub fn from_predictions(alpha: char, examples: &[ProbeExample], predictions: &[bool]) -> Self {
        let correct = examples.iter().zip(predictions).filter(|(e, &p)| e.label == p).count() as u64;
        Self::for_char(alpha, correct, examples.len() as u64)
    }

    pub fn merge(&mut self, other: &EvalCounts) {
        self.correct += other.correct;
        self.total += other.total;
        for (&ch, &(c, t)) in &other.per_char {
            let e = self.per_char.entry(ch).or_default();
            e.0 += c;
            e.1 += t;
        }
    }

    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    /// `char,correct,total,accuracy` rows plus a final `micro` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("char,correct,total,accuracy\n");
        for (ch, &(c, t)) in &self.per_char {
            let acc = if t == 0 { 0.0 } else { c as f64 / t as f64 };
            out.push_str(&format!("{ch},{c},{t},{acc:.6}\n"));
        }
        out.push_str(&format!("micro,{},{},{:.6}\n", self.correct, self.total, self.accuracy()));
        out
    }
}

pub fn eval_probe(model: &ProbeMlp<f32>, emb: &EmbeddingMatrix, data: &ProbeDataset) -> Result<EvalCounts> {
    let preds = predict(model, emb, &data.examples)?;
    Ok(EvalCounts::from_predictions(data.target_char, &data.examples, &preds))
}

/// Σ correct / Σ total.
pub fn micro_average(counts: &[EvalCounts]) -> Result<f64> {
    let (c, t) = counts.iter().fold((0u64, 0u64), |(c, t), e| (c + e.correct, t + e.total));
    if t == 0 {
        return Err(Error::Empty("evaluation counts"));
    }
    Ok(c as f64 / t as f64)
}

/// Splits into train and test, stratified by (label, length) so a matched
/// dataset stays matched on both sides.
pub fn split_dataset(data: &ProbeDataset, test_fraction: f64, seed: &SeedSpec) -> (ProbeDataset, ProbeDataset) {
    let mut strata: BTreeMap<(usize, bool), Vec<&ProbeExample>> = BTreeMap::new();
    for e in &data.examples {
        strata.entry((token_len(&e.token), e.label)).or_default().push(e);
    }
    let mut rng = seed.stream(0);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (_, mut members) in strata {
        members.shuffle(&mut rng);
        let n_test = (members.len() as f64 * test_fraction).round() as usize;
        test.extend(members[..n_test].iter().map(|&e| e.clone()));
        train.extend(members[n_test..].iter().map(|&e| e.clone()));
    }
    (data.with_examples(train), data.with_examples(test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probedata::MatchingMode;
    use rand::Rng;

    fn dataset(n: usize) -> ProbeDataset {
        let examples = (0..n)
            .map(|i| ProbeExample {
                token: format!("t{i}"),
                token_id: i as u32,
                label: i % 2 == 0,
            })
            .collect();
        ProbeDataset {
            target_char: 'a',
            examples,
            mode: MatchingMode::Unmatched,
        }
    }

    fn separable(n: usize, dim: usize) -> EmbeddingMatrix {
        let mut rng = SeedSpec::new(1, "emb").stream(0);
        let mut data = Vec::new();
        for i in 0..n {
            data.push(if i % 2 == 0 { 1.0 } else { -1.0 });
            data.extend((1..dim).map(|_| rng.gen_range(-1.0f32..1.0)));
        }
        EmbeddingMatrix::new(n, dim, data, 0).unwrap()
    }

    fn small_cfg(seed: u64) -> TrainConfig {
        let mut cfg = TrainConfig::new(SeedSpec::new(seed, "probe"));
        cfg.h1 = 32;
        cfg.h2 = 16;
        cfg
    }

    #[test]
    fn separable_data_is_learned() {
        // 4000 examples give about 190 optimizer steps over the three epochs
        let data = dataset(4000);
        let emb = separable(4000, 8);
        let model = train_probe(&emb, &data, &small_cfg(1)).unwrap();
        let acc = eval_probe(&model, &emb, &data).unwrap().accuracy();
        assert!(acc >= 0.99, "{acc}");
    }

    #[test]
    fn zero_embeddings_sit_at_chance() {
        let data = dataset(400);
        let emb = EmbeddingMatrix::new(400, 8, vec![0.0; 3200], 0).unwrap();
        let model = train_probe(&emb, &data, &small_cfg(1)).unwrap();
        let acc = eval_probe(&model, &emb, &data).unwrap().accuracy();
        assert!((0.45..=0.55).contains(&acc), "{acc}");
    }

    #[test]
    fn zero_output_layer_predicts_negative_everywhere() {
        let data = dataset(100);
        let emb = separable(100, 4);
        let mut model = ProbeMlp::<f32>::init(Shape { dim: 4, h1: 8, h2: 4 }, &mut SeedSpec::new(1, "m").stream(0));
        model.zero_output_layer();
        assert!(predict(&model, &emb, &data.examples).unwrap().iter().all(|&p| !p));
        assert_eq!(eval_probe(&model, &emb, &data).unwrap().accuracy(), 0.5);
    }

    #[test]
    fn same_seed_same_parameters() {
        let data = dataset(200);
        let emb = separable(200, 6);
        let a = train_probe(&emb, &data, &small_cfg(3)).unwrap();
        let b = train_probe(&emb, &data, &small_cfg(3)).unwrap();
        let bits = |m: &ProbeMlp<f32>| m.params.iter().map(|p| p.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        let c = train_probe(&emb, &data, &small_cfg(4)).unwrap();
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn evaluation_is_repeatable() {
        let data = dataset(200);
        let emb = separable(200, 6);
        let model = train_probe(&emb, &data, &small_cfg(3)).unwrap();
        assert_eq!(eval_probe(&model, &emb, &data).unwrap(), eval_probe(&model, &emb, &data).unwrap());
    }

    #[test]
    fn out_of_range_ids_are_errors() {
        let data = dataset(10);
        let emb = separable(5, 2);
        assert!(matches!(train_probe(&emb, &data, &small_cfg(1)), Err(Error::IdOutOfRange { .. })));
    }

    #[test]
    fn micro_average_arithmetic() {
        let a = EvalCounts::for_char('a', 9, 10);
        let b = EvalCounts::for_char('b', 1, 10);
        assert_eq!(micro_average(&[a.clone(), b.clone()]).unwrap(), 0.5);
        assert_eq!(micro_average(&[EvalCounts::for_char('c', 8, 10)]).unwrap(), 0.8);
        assert_eq!(micro_average(&[EvalCounts::for_char('c', 10, 10)]).unwrap(), 1.0);
        assert!(micro_average(&[]).is_err());
        let mut all = a;
        all.merge(&b);
        let sum: u64 = all.per_char.values().map(|v| v.1).sum();
        assert_eq!(sum, all.total);
        assert_eq!(all.to_csv(), "char,correct,total,accuracy\na,9,10,0.900000\nb,1,10,0.100000\nmicro,10,20,0.500000\n");
    }

    #[test]
    fn split_keeps_strata_balanced() {
        let data = dataset(1000);
        let (train, test) = split_dataset(&data, 0.2, &SeedSpec::new(1, "split"));
        assert_eq!(train.len() + test.len(), 1000);
        assert_eq!(test.positives().count(), test.negatives().count());
        assert!((190..=210).contains(&test.len()));
    }
}
