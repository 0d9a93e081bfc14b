//! Physical, protocol and decision-process constants.
//!
//! Defaults reproduce the reference deployment: 400 nodes in a 200 m square,
//! base station at (100 m, 1200 m), first-order radio constants and a 10 kbit
//! sensing packet.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::geometry::Point;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub node_count: usize,
    pub region_width: f64,
    pub region_height: f64,
    pub bs_position: Point,
    /// Sensing (monitoring) radius r in meters.
    pub monitor_radius: f64,
    pub node_height: f64,
    pub bs_height: f64,
    /// E0 in joules.
    pub initial_energy: f64,
    /// J/bit for the transceiver electronics.
    pub e_elec: f64,
    /// J/bit/m^2, free-space amplifier.
    pub eps_fs: f64,
    /// J/bit/m^4, multipath amplifier.
    pub eps_amp: f64,
    /// q0 in J/bit.
    pub fusion_cost: f64,
    pub data_packet_bits: f64,
    pub control_packet_bits: f64,
    /// Hz.
    pub bandwidth: f64,
    /// dBm/Hz.
    pub noise_density: f64,
    /// P0 in watts at unit excitation.
    pub node_tx_power: f64,
    /// dBm.
    pub min_rx_power: f64,
    /// Carrier wavelength in meters.
    pub wavelength: f64,
    pub n_cb: usize,
    /// P: lower-bound ratio of cluster heads.
    pub ch_ratio: f64,
    /// K: overlap amplification factor.
    pub amplification: f64,
    /// p: dead fraction defining the lifetime quantile.
    pub death_fraction: f64,
    /// Throughput reward weight; `None` means 1/L.
    pub zeta1: Option<f64>,
    /// Energy reward weight; `None` means 1/E0.
    pub zeta2: Option<f64>,
    pub mc_samples: usize,
    pub master_seed: u64,
    pub max_rounds: usize,
    /// Tikhonov concentration of the phase error; `None` is perfect sync.
    pub phase_kappa: Option<f64>,
    /// Whether the sink is part of the beamforming array.
    pub sink_beamforms: bool,
    /// Softmax temperature used when sampling beamforming nodes.
    pub selection_temperature: f64,
    /// Optional cap on the sink-to-beamformer distance.
    pub d_max: Option<f64>,
    /// Append raw (x, y) to environment observations.
    pub obs_include_positions: bool,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            node_count: 400,
            region_width: 200.0,
            region_height: 200.0,
            bs_position: Point::new(100.0, 1200.0),
            monitor_radius: 6.0,
            node_height: 1.5,
            bs_height: 20.0,
            initial_energy: 4.0,
            e_elec: 50e-9,
            eps_fs: 10e-12,
            eps_amp: 0.0013e-12,
            fusion_cost: 20e-9,
            data_packet_bits: 10_000.0,
            control_packet_bits: 200.0,
            bandwidth: 100e3,
            noise_density: -174.0,
            node_tx_power: 0.1,
            min_rx_power: -52.0,
            wavelength: 0.125,
            n_cb: 10,
            ch_ratio: 0.07,
            amplification: 1.2,
            death_fraction: 0.2,
            zeta1: None,
            zeta2: None,
            mc_samples: 20_000,
            master_seed: 0,
            max_rounds: 20_000,
            phase_kappa: None,
            sink_beamforms: true,
            selection_temperature: 0.1,
            d_max: None,
            obs_include_positions: false,
        }
    }
}

impl NetworkConfig {
    /// Crossover distance between the free-space and multipath branches.
    pub fn d0(&self) -> f64 {
        (self.eps_fs / self.eps_amp).sqrt()
    }

    pub fn zeta1(&self) -> f64 {
        self.zeta1.unwrap_or(1.0 / self.data_packet_bits)
    }

    pub fn zeta2(&self) -> f64 {
        self.zeta2.unwrap_or(1.0 / self.initial_energy)
    }

    /// Noise power sigma^2 in watts over the configured bandwidth.
    pub fn noise_power_w(&self) -> f64 {
        dbm_to_watts(self.noise_density + 10.0 * self.bandwidth.log10())
    }

    /// Length of a CH rotation epoch, ceil(1/P).
    pub fn epoch_len(&self) -> usize {
        (1.0 / self.ch_ratio).ceil().max(1.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("region_width", self.region_width),
            ("region_height", self.region_height),
            ("monitor_radius", self.monitor_radius),
            ("node_height", self.node_height),
            ("bs_height", self.bs_height),
            ("initial_energy", self.initial_energy),
            ("e_elec", self.e_elec),
            ("eps_fs", self.eps_fs),
            ("eps_amp", self.eps_amp),
            ("fusion_cost", self.fusion_cost),
            ("data_packet_bits", self.data_packet_bits),
            ("control_packet_bits", self.control_packet_bits),
            ("bandwidth", self.bandwidth),
            ("node_tx_power", self.node_tx_power),
            ("wavelength", self.wavelength),
            ("selection_temperature", self.selection_temperature),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(field, format!("must be finite and > 0, got {value}")));
            }
        }
        for (field, value) in [
            ("noise_density", self.noise_density),
            ("min_rx_power", self.min_rx_power),
        ] {
            if !value.is_finite() {
                return Err(Error::invalid(field, "must be finite"));
            }
        }
        if !self.bs_position.x.is_finite() || !self.bs_position.y.is_finite() {
            return Err(Error::invalid("bs_position", "must be finite"));
        }
        if self.node_count == 0 {
            return Err(Error::invalid("node_count", "must be at least 1"));
        }
        if !(self.ch_ratio > 0.0 && self.ch_ratio <= 1.0) {
            return Err(Error::invalid(
                "ch_ratio",
                format!("must lie in (0, 1], got {}", self.ch_ratio),
            ));
        }
        if !(self.amplification >= 1.0 && self.amplification.is_finite()) {
            return Err(Error::invalid(
                "amplification",
                format!("must be >= 1, got {}", self.amplification),
            ));
        }
        if !(self.death_fraction > 0.0 && self.death_fraction <= 1.0) {
            return Err(Error::invalid(
                "death_fraction",
                format!("must lie in (0, 1], got {}", self.death_fraction),
            ));
        }
        for (field, value) in [("zeta1", self.zeta1), ("zeta2", self.zeta2)] {
            if let Some(v) = value {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::invalid(field, format!("must be >= 0, got {v}")));
                }
            }
        }
        if self.n_cb == 0 {
            return Err(Error::invalid("n_cb", "must be at least 1"));
        }
        if self.mc_samples < 1000 {
            return Err(Error::invalid(
                "mc_samples",
                format!("must be >= 1000, got {}", self.mc_samples),
            ));
        }
        if self.max_rounds == 0 {
            return Err(Error::invalid("max_rounds", "must be at least 1"));
        }
        if let Some(k) = self.phase_kappa {
            if k.is_nan() || k < 0.0 {
                return Err(Error::invalid("phase_kappa", format!("must be >= 0, got {k}")));
            }
        }
        if let Some(d) = self.d_max {
            if d.is_nan() || d <= 0.0 {
                return Err(Error::invalid("d_max", format!("must be > 0, got {d}")));
            }
        }
        Ok(())
    }

    /// Config as a flat JSON object with dotted keys (`bs_position.x`).
    pub fn to_flat_json(&self) -> Map<String, Value> {
        let nested = serde_json::to_value(self).expect("config serializes");
        let mut flat = Map::new();
        flatten_into(&mut flat, "", &nested);
        flat
    }

    /// Applies flat dotted-key overrides on top of `self`.
    pub fn apply_flat_overrides(&mut self, overrides: &Map<String, Value>) -> Result<()> {
        let mut flat = self.to_flat_json();
        for (key, value) in overrides {
            let Some(current) = flat.get(key) else {
                return Err(Error::UnknownConfigField(key.clone()));
            };
            if !json_kind_compatible(key, current, value) {
                return Err(Error::invalid(key, format!("unexpected value {value}")));
            }
            flat.insert(key.clone(), value.clone());
        }
        let nested = unflatten(&flat);
        *self = serde_json::from_value(nested).map_err(|e| Error::ConfigParse(e.to_string()))?;
        Ok(())
    }

    /// Parses a flat JSON document over the defaults and validates it.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        let Value::Object(map) = value else {
            return Err(Error::ConfigParse("top level must be a JSON object".into()));
        };
        let mut config = Self::default();
        config.apply_flat_overrides(&map)?;
        config.validate()?;
        Ok(config)
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

fn flatten_into(out: &mut Map<String, Value>, prefix: &str, value: &Value) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_into(out, &key, v);
            }
        }
        other => {
            out.insert(prefix.to_string(), other.clone());
        }
    }
}

fn unflatten(flat: &Map<String, Value>) -> Value {
    let mut root = Map::new();
    for (key, value) in flat {
        let mut cursor = &mut root;
        let mut parts = key.split('.').peekable();
        while let Some(part) = parts.next() {
            if parts.peek().is_none() {
                cursor.insert(part.to_string(), value.clone());
            } else {
                cursor = cursor
                    .entry(part.to_string())
                    .or_insert_with(|| Value::Object(Map::new()))
                    .as_object_mut()
                    .expect("dotted prefix is an object");
            }
        }
    }
    Value::Object(root)
}

const OPTIONAL_FIELDS: [&str; 4] = ["zeta1", "zeta2", "phase_kappa", "d_max"];

fn json_kind_compatible(key: &str, current: &Value, new: &Value) -> bool {
    if OPTIONAL_FIELDS.contains(&key) {
        return new.is_null() || new.is_number();
    }
    match current {
        Value::Number(n) if n.is_u64() => new.is_u64(),
        Value::Number(_) => new.is_number(),
        Value::Bool(_) => new.is_boolean(),
        Value::String(_) => new.is_string(),
        _ => false,
    }
}
