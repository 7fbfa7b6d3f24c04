//! Per-thread counters used to observe data movement.
//!
//! `array_copies` counts elements duplicated by [`Array::copy_to`](crate::Array::copy_to)
//! and friends. Creating views never touches it. `matrix_conversions` counts
//! application-to-backend matrix conversions performed by the facade.
//!
//! Counters are thread local so concurrently running tests do not interfere.

use std::cell::Cell;

thread_local! {
    static ARRAY_COPIES: Cell<u64> = const { Cell::new(0) };
    static MATRIX_CONVERSIONS: Cell<u64> = const { Cell::new(0) };
}

pub fn array_copies() -> u64 {
    ARRAY_COPIES.with(Cell::get)
}

pub fn matrix_conversions() -> u64 {
    MATRIX_CONVERSIONS.with(Cell::get)
}

pub fn reset() {
    ARRAY_COPIES.with(|c| c.set(0));
    MATRIX_CONVERSIONS.with(|c| c.set(0));
}

pub(crate) fn record_array_copy(elements: usize) {
    ARRAY_COPIES.with(|c| c.set(c.get() + elements as u64));
}

pub(crate) fn record_matrix_conversion() {
    MATRIX_CONVERSIONS.with(|c| c.set(c.get() + 1));
}
