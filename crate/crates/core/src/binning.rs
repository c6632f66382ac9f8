//! Bijection between source messages and (bin, offset) pairs.
//!
//! The `M_S = M_R * M_D` messages are laid out as `M_R` contiguous bins of
//! `M_D` messages each, so `m = m1 * M_D + m2`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Codebook sizes: `m_r` bins of `m_d` messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookParams {
    pub m_r: u64,
    pub m_d: u64,
}

impl CodebookParams {
    pub fn new(m_r: u64, m_d: u64) -> Result<Self> {
        let cb = CodebookParams { m_r, m_d };
        cb.validate()?;
        Ok(cb)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_r == 0 || self.m_d == 0 {
            return Err(Error::invalid(format!(
                "codebook sizes must be positive (m_r={}, m_d={})",
                self.m_r, self.m_d
            )));
        }
        if self.m_r.checked_mul(self.m_d).is_none() {
            return Err(Error::Resource(format!(
                "codebook size m_r*m_d overflows ({} x {})",
                self.m_r, self.m_d
            )));
        }
        Ok(())
    }

    /// Source codebook size `M_S`.
    pub fn m_s(&self) -> u64 {
        self.m_r * self.m_d
    }

    /// A single bin turns the relay off.
    pub fn is_direct(&self) -> bool {
        self.m_r == 1
    }
}

/// A source message together with its bin decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Message {
    pub m: u64,
    pub m1: u64,
    pub m2: u64,
}

impl Message {
    pub fn new(m: u64, cb: &CodebookParams) -> Result<Self> {
        let (m1, m2) = split(m, cb)?;
        Ok(Message { m, m1, m2 })
    }
}

pub fn split(m: u64, cb: &CodebookParams) -> Result<(u64, u64)> {
    if m >= cb.m_s() {
        return Err(Error::domain(format!(
            "message index {m} out of range [0, {})",
            cb.m_s()
        )));
    }
    Ok((m / cb.m_d, m % cb.m_d))
}

pub fn join(m1: u64, m2: u64, cb: &CodebookParams) -> Result<u64> {
    if m1 >= cb.m_r {
        return Err(Error::domain(format!(
            "bin index {m1} out of range [0, {})",
            cb.m_r
        )));
    }
    if m2 >= cb.m_d {
        return Err(Error::domain(format!(
            "within-bin index {m2} out of range [0, {})",
            cb.m_d
        )));
    }
    Ok(m1 * cb.m_d + m2)
}

/// Message indices belonging to bin `m1`, in increasing order.
pub fn bin_members(m1: u64, cb: &CodebookParams) -> Result<Range<u64>> {
    if m1 >= cb.m_r {
        return Err(Error::domain(format!(
            "bin index {m1} out of range [0, {})",
            cb.m_r
        )));
    }
    let start = m1 * cb.m_d;
    Ok(start..start + cb.m_d)
}
