//! `key = value` experiment files.
//!
//! ```text
//! # strong turbulence, SISO, learned transceiver
//! modulation_order = 4
//! regime = strong            # or: alpha = 4.2 / beta = 1.4, or: none
//! kind = end-to-end
//! esn0_grid_db = 10, 15, 20, 25, 30
//! seed = 7
//! ```
//!
//! Required: `modulation_order`, `regime` (or both `alpha` and `beta`),
//! `kind`, `esn0_grid_db`, `seed`. Everything else has a default; see
//! [`KEYS`].

use std::collections::HashMap;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mimo::{CombinerKind, Fading, LinkConfig};
use crate::neural::{ActivationKind, OptimizerKind};
use crate::transceivers::{CsiMode, TrainConfig, TransceiverKind};
use crate::turbulence::{GammaGammaParams, TurbulenceRegime};

/// Batch size selected by the full-scale switch (16·256·16 symbols).
pub const FULL_SCALE_BATCH_SIZE: usize = 65_536;
pub const MIN_SYMBOLS_PER_POINT: u64 = 100;
pub const DEFAULT_SYMBOLS_PER_POINT: u64 = 100_000;

/// Every accepted key.
pub const KEYS: [&str; 24] = [
    "modulation_order",
    "regime",
    "alpha",
    "beta",
    "n_t",
    "n_r",
    "combiner",
    "kind",
    "csi_mode",
    "esn0_grid_db",
    "symbols_per_point",
    "seed",
    "output",
    "hidden_layers",
    "neurons_per_layer",
    "activation",
    "batch_size",
    "iterations",
    "learning_rate",
    "optimizer",
    "train_esn0_db",
    "eta",
    "normalize_tx_power",
    "full_scale",
];

/// A validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub order: usize,
    pub fading: Fading,
    pub n_t: usize,
    pub n_r: usize,
    pub eta: f64,
    pub normalize_tx_power: bool,
    pub combiner: CombinerKind,
    pub kind: TransceiverKind,
    pub esn0_grid_db: Vec<f64>,
    pub symbols_per_point: u64,
    /// Hyperparameters; `train.train_esn0_db` is ignored unless
    /// `train_esn0_db` below is set.
    pub train: TrainConfig,
    /// Fixed training Es/N0; `None` trains afresh at every grid point.
    pub train_esn0_db: Option<f64>,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl SimConfig {
    /// A config with every optional field at its default.
    pub fn new(order: usize, fading: Fading, kind: TransceiverKind, esn0_grid_db: Vec<f64>, seed: u64) -> Self {
        let link = LinkConfig::siso(fading);
        Self {
            order,
            fading,
            n_t: 1,
            n_r: 1,
            eta: 1.0,
            normalize_tx_power: false,
            combiner: CombinerKind::Mrc,
            kind,
            esn0_grid_db,
            symbols_per_point: DEFAULT_SYMBOLS_PER_POINT,
            train: TrainConfig::for_link(&link),
            train_esn0_db: None,
            seed,
            output: None,
        }
    }

    pub fn link(&self) -> LinkConfig {
        LinkConfig {
            n_t: self.n_t,
            n_r: self.n_r,
            eta: self.eta,
            fading: self.fading,
            normalize_tx_power: self.normalize_tx_power,
        }
    }

    /// Training hyperparameters for a grid point.
    pub fn train_config_at(&self, esn0_db: f64) -> TrainConfig {
        TrainConfig {
            train_esn0_db: self.train_esn0_db.unwrap_or(esn0_db),
            ..self.train
        }
    }

    pub fn validate(&self) -> Result<()> {
        crate::modem::qam_constellation(self.order)?;
        self.link().validate()?;
        if self.esn0_grid_db.is_empty() {
            return Err(Error::config("esn0_grid_db is empty"));
        }
        if self.esn0_grid_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("esn0_grid_db values must be finite"));
        }
        if self.esn0_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("grid not ascending"));
        }
        if self.symbols_per_point < MIN_SYMBOLS_PER_POINT {
            return Err(Error::config(format!(
                "symbols_per_point must be at least {MIN_SYMBOLS_PER_POINT}"
            )));
        }
        self.train.validate()
    }

    /// Re-emits the config in the file format; `parse_config` of the result
    /// yields an equal config.
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        put("modulation_order", self.order.to_string());
        match self.fading {
            Fading::None => put("regime", "none".into()),
            Fading::GammaGamma(p) => match TurbulenceRegime::from_params(p) {
                Some(r) => put("regime", r.to_string()),
                None => {
                    put("alpha", format!("{:?}", p.alpha));
                    put("beta", format!("{:?}", p.beta));
                }
            },
        }
        put("n_t", self.n_t.to_string());
        put("n_r", self.n_r.to_string());
        put("combiner", self.combiner.to_string());
        put("kind", self.kind.to_string());
        put("csi_mode", self.train.csi_mode.to_string());
        put(
            "esn0_grid_db",
            self.esn0_grid_db.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", "),
        );
        put("symbols_per_point", self.symbols_per_point.to_string());
        put("seed", self.seed.to_string());
        if let Some(p) = &self.output {
            put("output", p.display().to_string());
        }
        put("hidden_layers", self.train.hidden_layers.to_string());
        put("neurons_per_layer", self.train.neurons_per_layer.to_string());
        put("activation", self.train.activation.to_string());
        put("batch_size", self.train.batch_size.to_string());
        put("iterations", self.train.iterations.to_string());
        put("learning_rate", format!("{:?}", self.train.learning_rate));
        put("optimizer", self.train.optimizer.to_string());
        if let Some(db) = self.train_esn0_db {
            put("train_esn0_db", format!("{db:?}"));
        }
        put("eta", format!("{:?}", self.eta));
        put("normalize_tx_power", self.normalize_tx_power.to_string());
        out
    }
}

fn value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.parse::<T>().map_err(|_| Error::Parse {
        line,
        message: format!("bad value '{raw}' for {key}"),
    })
}

fn typed<T: FromStr<Err = Error>>(line: usize, raw: &str) -> Result<T> {
    raw.parse::<T>().map_err(|e| Error::Parse {
        line,
        message: e.to_string(),
    })
}

fn parse_bool(line: usize, key: &str, raw: &str) -> Result<bool> {
    match raw.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Parse {
            line,
            message: format!("bad value '{raw}' for {key} (expected true/false)"),
        }),
    }
}

/// Parses and validates a config file.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    // key -> (line, raw value)
    let mut entries: HashMap<&str, (usize, &str)> = HashMap::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw_line.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        let (key, val) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            message: format!("expected 'key = value', got '{content}'"),
        })?;
        let (key, val) = (key.trim(), val.trim());
        let Some(&known) = KEYS.iter().find(|&&k| k == key) else {
            return Err(Error::Parse {
                line,
                message: format!("unknown key '{key}'"),
            });
        };
        if val.is_empty() {
            return Err(Error::Parse {
                line,
                message: format!("empty value for {key}"),
            });
        }
        if let Some((first, _)) = entries.insert(known, (line, val)) {
            return Err(Error::Parse {
                line,
                message: format!("{key} already set on line {first}"),
            });
        }
    }

    let required = |key: &str| -> Result<(usize, &str)> {
        entries
            .get(key)
            .copied()
            .ok_or_else(|| Error::config(format!("missing required key '{key}'")))
    };

    let (l, v) = required("modulation_order")?;
    let order: usize = value(l, "modulation_order", v)?;
    let (l, v) = required("kind")?;
    let kind: TransceiverKind = typed(l, v)?;
    let (l, v) = required("seed")?;
    let seed: u64 = value(l, "seed", v)?;

    let (grid_line, v) = required("esn0_grid_db")?;
    let grid = v
        .split(',')
        .map(|s| value::<f64>(grid_line, "esn0_grid_db", s.trim()))
        .collect::<Result<Vec<_>>>()?;
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parse {
            line: grid_line,
            message: "grid not ascending".into(),
        });
    }

    let fading = match (entries.get("regime"), entries.get("alpha"), entries.get("beta")) {
        (Some(&(l, _)), Some(_), _) | (Some(&(l, _)), _, Some(_)) => {
            return Err(Error::Parse {
                line: l,
                message: "give either regime or alpha/beta, not both".into(),
            })
        }
        (Some(&(l, v)), None, None) => {
            if v.eq_ignore_ascii_case("none") {
                Fading::None
            } else {
                Fading::GammaGamma(typed::<TurbulenceRegime>(l, v)?.params())
            }
        }
        (None, Some(&(la, va)), Some(&(lb, vb))) => {
            let alpha: f64 = value(la, "alpha", va)?;
            let beta: f64 = value(lb, "beta", vb)?;
            Fading::GammaGamma(GammaGammaParams::new(alpha, beta).map_err(|e| Error::Parse {
                line: la,
                message: e.to_string(),
            })?)
        }
        (None, Some(&(l, _)), None) | (None, None, Some(&(l, _))) => {
            return Err(Error::Parse {
                line: l,
                message: "alpha and beta must be given together".into(),
            })
        }
        (None, None, None) => return Err(Error::config("missing required key 'regime' (or alpha/beta)")),
    };

    let mut cfg = SimConfig::new(order, fading, kind, grid, seed);
    let get = |k: &str| entries.get(k).copied();
    if let Some((l, v)) = get("n_t") {
        cfg.n_t = value(l, "n_t", v)?;
    }
    if let Some((l, v)) = get("n_r") {
        cfg.n_r = value(l, "n_r", v)?;
    }
    if let Some((l, v)) = get("eta") {
        cfg.eta = value(l, "eta", v)?;
    }
    if let Some((l, v)) = get("normalize_tx_power") {
        cfg.normalize_tx_power = parse_bool(l, "normalize_tx_power", v)?;
    }
    if let Some((l, v)) = get("combiner") {
        cfg.combiner = typed(l, v)?;
    }
    if let Some((l, v)) = get("symbols_per_point") {
        // accept 1e5-style counts
        let n: f64 = value(l, "symbols_per_point", v)?;
        if n.fract() != 0.0 || n < 0.0 || n > u64::MAX as f64 {
            return Err(Error::Parse {
                line: l,
                message: format!("symbols_per_point must be a whole number, got '{v}'"),
            });
        }
        cfg.symbols_per_point = n as u64;
        if cfg.symbols_per_point < MIN_SYMBOLS_PER_POINT {
            return Err(Error::Parse {
                line: l,
                message: format!("symbols_per_point must be at least {MIN_SYMBOLS_PER_POINT}"),
            });
        }
    }
    if let Some((_, v)) = get("output") {
        cfg.output = Some(PathBuf::from(v));
    }

    cfg.train = TrainConfig::for_link(&cfg.link());
    if let Some((l, v)) = get("csi_mode") {
        cfg.train.csi_mode = typed::<CsiMode>(l, v)?;
    }
    if let Some((l, v)) = get("hidden_layers") {
        cfg.train.hidden_layers = value(l, "hidden_layers", v)?;
    }
    if let Some((l, v)) = get("neurons_per_layer") {
        cfg.train.neurons_per_layer = value(l, "neurons_per_layer", v)?;
    }
    if let Some((l, v)) = get("activation") {
        cfg.train.activation = typed::<ActivationKind>(l, v)?;
    }
    if let Some((l, v)) = get("full_scale") {
        if parse_bool(l, "full_scale", v)? {
            cfg.train.batch_size = FULL_SCALE_BATCH_SIZE;
        }
    }
    if let Some((l, v)) = get("batch_size") {
        cfg.train.batch_size = value(l, "batch_size", v)?;
    }
    if let Some((l, v)) = get("iterations") {
        cfg.train.iterations = value(l, "iterations", v)?;
    }
    if let Some((l, v)) = get("learning_rate") {
        cfg.train.learning_rate = value(l, "learning_rate", v)?;
    }
    if let Some((l, v)) = get("optimizer") {
        cfg.train.optimizer = typed::<OptimizerKind>(l, v)?;
    }
    if let Some((l, v)) = get("train_esn0_db") {
        cfg.train_esn0_db = Some(value(l, "train_esn0_db", v)?);
    }

    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "modulation_order = 4\nregime = strong\nkind = qam-ml\nesn0_grid_db = 0, 5, 10\nseed = 1\n";

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.order, 4);
        assert_eq!(cfg.fading, Fading::GammaGamma(TurbulenceRegime::Strong.params()));
        assert_eq!((cfg.n_t, cfg.n_r), (1, 1));
        assert_eq!(cfg.combiner, CombinerKind::Mrc);
        assert_eq!(cfg.symbols_per_point, DEFAULT_SYMBOLS_PER_POINT);
        assert_eq!(cfg.train, TrainConfig::default());
        assert_eq!(cfg.train.hidden_layers, 4);
        assert_eq!(cfg.train.neurons_per_layer, 40);
        assert_eq!(cfg.train.iterations, 1000);
        assert_eq!(cfg.train.learning_rate, 0.005);
        assert_eq!(cfg.train.optimizer, OptimizerKind::Adam);
        assert_eq!(cfg.train_esn0_db, None);
    }

    #[test]
    fn descending_grid_is_rejected_with_its_line() {
        let text = MINIMAL.replace("0, 5, 10", "10, 5");
        match parse_config(&text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 4);
                assert_eq!(message, "grid not ascending");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn explicit_parameters_round_trip_to_preset() {
        let text = MINIMAL.replace("regime = strong", "alpha = 4.2\nbeta = 1.4");
        let cfg = parse_config(&text).unwrap();
        let Fading::GammaGamma(p) = cfg.fading else { panic!() };
        assert_eq!(TurbulenceRegime::from_params(p), Some(TurbulenceRegime::Strong));
    }

    #[test]
    fn unknown_key_names_line() {
        let text = format!("{MINIMAL}# ok\nbogus = 3\n");
        match parse_config(&text) {
            Err(Error::Parse { line: 7, message }) => assert!(message.contains("bogus")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_seed_is_an_error() {
        let text = MINIMAL.replace("seed = 1\n", "");
        assert!(matches!(parse_config(&text), Err(Error::Config(m)) if m.contains("seed")));
    }

    #[test]
    fn malformed_values_and_duplicates() {
        assert!(matches!(
            parse_config(&MINIMAL.replace("seed = 1", "seed = x")),
            Err(Error::Parse { line: 5, .. })
        ));
        assert!(matches!(
            parse_config(&format!("{MINIMAL}seed = 2\n")),
            Err(Error::Parse { line: 6, .. })
        ));
        assert!(parse_config(&format!("{MINIMAL}symbols_per_point = 50\n")).is_err());
        assert!(parse_config(&MINIMAL.replace("modulation_order = 4", "modulation_order = 8")).is_err());
    }

    #[test]
    fn mimo_defaults_to_crelu_and_text_round_trips() {
        let text = format!("{MINIMAL}n_t = 2\nn_r = 2\ncombiner = egc\nsymbols_per_point = 1e4\ntrain_esn0_db = 12.5\n");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.train.activation, ActivationKind::Crelu);
        assert_eq!(cfg.symbols_per_point, 10_000);
        assert_eq!(parse_config(&cfg.to_config_text()).unwrap(), cfg);

        let odd = parse_config(&MINIMAL.replace("regime = strong", "alpha = 3.3\nbeta = 2.2")).unwrap();
        assert_eq!(parse_config(&odd.to_config_text()).unwrap(), odd);
    }

    #[test]
    fn full_scale_switch() {
        let cfg = parse_config(&format!("{MINIMAL}full_scale = true\n")).unwrap();
        assert_eq!(cfg.train.batch_size, FULL_SCALE_BATCH_SIZE);
    }
}
