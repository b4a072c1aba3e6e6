use std::collections::VecDeque;

use crate::error::{invalid, Error, Result};
use crate::types::{check_finite, Axes};

/// Fixed-capacity FIFO of the most recent six-axis measurements of one foot.
///
/// All six axes share one buffer so that the per-axis series stay aligned in time.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleWindow {
    capacity: usize,
    buf: VecDeque<Axes>,
}

impl SampleWindow {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(invalid("window_size", "capacity must be at least 1"));
        }
        Ok(Self {
            capacity,
            buf: VecDeque::with_capacity(capacity),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn fill(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.buf.len() == self.capacity
    }

    /// Appends `v` as the newest element, evicting the oldest one when full.
    /// Returns the evicted vector, if any.
    pub fn push(&mut self, v: Axes) -> Result<Option<Axes>> {
        check_finite(&v)?;
        let evicted = if self.is_full() {
            self.buf.pop_front()
        } else {
            None
        };
        self.buf.push_back(v);
        Ok(evicted)
    }

    /// Values of one axis, oldest to newest.
    pub fn axis(&self, axis: usize) -> Result<Vec<f64>> {
        if axis >= 6 {
            return Err(Error::AxisOutOfRange(axis));
        }
        Ok(self.buf.iter().map(|v| v[axis]).collect())
    }

    pub fn newest(&self) -> Option<&Axes> {
        self.buf.back()
    }

    pub fn oldest(&self) -> Option<&Axes> {
        self.buf.front()
    }

    /// Buffered vectors, oldest to newest.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = &Axes> + '_ {
        self.buf.iter()
    }

    pub fn clear(&mut self) {
        self.buf.clear();
    }
}
