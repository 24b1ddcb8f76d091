//! Object heap accounting.
//!
//! The machine's object memory tracks allocation sizes and lifetimes,
//! not contents: `OBJ.n` hands out fresh handles and `OBJ.r` retires
//! them, with live/peak byte counters and strict double-free and
//! unknown-handle detection. Handles are never reused within a run.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum HeapError {
    #[error("allocation of zero or negative size")]
    ZeroSizeAllocation,
    #[error("handle {0} released twice")]
    DoubleFree(u64),
    #[error("handle {0} was never allocated")]
    UnknownHandle(u64),
}

/// Allocation bookkeeping for object memory.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObjectHeap {
    next_handle: u64,
    live: BTreeMap<u64, u64>,
    released: BTreeSet<u64>,
    pub live_bytes: u64,
    pub peak_bytes: u64,
    pub alloc_count: u64,
    pub release_count: u64,
}

impl ObjectHeap {
    pub fn new() -> ObjectHeap {
        ObjectHeap::default()
    }

    /// Allocate `size` bytes, returning a fresh handle (from 1 up).
    pub fn alloc(&mut self, size: i64) -> Result<u64, HeapError> {
        if size <= 0 {
            return Err(HeapError::ZeroSizeAllocation);
        }
        self.next_handle += 1;
        let handle = self.next_handle;
        self.live.insert(handle, size as u64);
        self.live_bytes += size as u64;
        self.peak_bytes = self.peak_bytes.max(self.live_bytes);
        self.alloc_count += 1;
        Ok(handle)
    }

    /// Release a live handle.
    pub fn release(&mut self, handle: u64) -> Result<(), HeapError> {
        match self.live.remove(&handle) {
            Some(size) => {
                self.live_bytes -= size;
                self.released.insert(handle);
                self.release_count += 1;
                Ok(())
            }
            None if self.released.contains(&handle) => Err(HeapError::DoubleFree(handle)),
            None => Err(HeapError::UnknownHandle(handle)),
        }
    }

    pub fn is_live(&self, handle: u64) -> bool {
        self.live.contains_key(&handle)
    }

    pub fn live_objects(&self) -> usize {
        self.live.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alloc_and_release_track_bytes() {
        let mut h = ObjectHeap::new();
        let a = h.alloc(16).unwrap();
        assert_eq!(a, 1);
        assert_eq!(h.live_bytes, 16);
        let b = h.alloc(8).unwrap();
        assert_eq!(b, 2);
        assert_eq!(h.live_bytes, 24);
        assert_eq!(h.peak_bytes, 24);
        h.release(a).unwrap();
        assert_eq!(h.live_bytes, 8);
        assert_eq!(h.peak_bytes, 24);
        assert_eq!((h.alloc_count, h.release_count), (2, 1));
    }

    #[test]
    fn zero_size_is_rejected() {
        let mut h = ObjectHeap::new();
        assert_eq!(h.alloc(0), Err(HeapError::ZeroSizeAllocation));
        assert_eq!(h.alloc(-4), Err(HeapError::ZeroSizeAllocation));
    }

    #[test]
    fn double_free_and_unknown_are_distinct() {
        let mut h = ObjectHeap::new();
        let a = h.alloc(4).unwrap();
        h.release(a).unwrap();
        assert_eq!(h.release(a), Err(HeapError::DoubleFree(a)));
        assert_eq!(h.release(99), Err(HeapError::UnknownHandle(99)));
    }

    #[test]
    fn handles_are_never_reused() {
        let mut h = ObjectHeap::new();
        let a = h.alloc(4).unwrap();
        h.release(a).unwrap();
        let b = h.alloc(4).unwrap();
        assert_ne!(a, b);
    }
}
