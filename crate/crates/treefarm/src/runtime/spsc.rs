//! Bounded single-producer/single-consumer FIFO queue.
//!
//! Both ends are non-blocking: `push` on a full queue hands the value back,
//! `pop` on an empty queue returns `None`. The producer and consumer halves
//! are separate owned handles, so the one-context-per-end contract is
//! enforced by ownership rather than by discipline.

use std::cell::UnsafeCell;
use std::mem::MaybeUninit;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

struct Ring<T> {
    buf: Box<[UnsafeCell<MaybeUninit<T>>]>,
    capacity: usize,
    /// Next slot to pop; owned by the consumer, read by the producer.
    head: AtomicUsize,
    /// Next slot to push; owned by the producer, read by the consumer.
    tail: AtomicUsize,
}

// The ring hands each element from exactly one producer to exactly one
// consumer; indices only ever grow and are published with release stores.
unsafe impl<T: Send> Sync for Ring<T> {}
unsafe impl<T: Send> Send for Ring<T> {}

impl<T> Drop for Ring<T> {
    fn drop(&mut self) {
        let head = *self.head.get_mut();
        let tail = *self.tail.get_mut();
        for i in head..tail {
            unsafe { (*self.buf[i % self.capacity].get()).assume_init_drop() };
        }
    }
}

pub struct Producer<T> {
    ring: Arc<Ring<T>>,
}

pub struct Consumer<T> {
    ring: Arc<Ring<T>>,
}

/// Creates a queue holding at most `capacity` elements.
pub fn channel<T>(capacity: usize) -> (Producer<T>, Consumer<T>) {
    assert!(capacity >= 1, "queue capacity must be at least 1");
    let buf = (0..capacity)
        .map(|_| UnsafeCell::new(MaybeUninit::uninit()))
        .collect::<Vec<_>>()
        .into_boxed_slice();
    let ring = Arc::new(Ring {
        buf,
        capacity,
        head: AtomicUsize::new(0),
        tail: AtomicUsize::new(0),
    });
    (Producer { ring: ring.clone() }, Consumer { ring })
}

impl<T> Producer<T> {
    /// Appends a value, or returns it when the queue is full. Never blocks.
    pub fn push(&mut self, value: T) -> Result<(), T> {
        let ring = &*self.ring;
        let tail = ring.tail.load(Ordering::Relaxed);
        let head = ring.head.load(Ordering::Acquire);
        if tail.wrapping_sub(head) == ring.capacity {
            return Err(value);
        }
        unsafe { (*ring.buf[tail % ring.capacity].get()).write(value) };
        ring.tail.store(tail.wrapping_add(1), Ordering::Release);
        Ok(())
    }

    pub fn is_full(&self) -> bool {
        let ring = &*self.ring;
        let tail = ring.tail.load(Ordering::Relaxed);
        let head = ring.head.load(Ordering::Acquire);
        tail.wrapping_sub(head) == ring.capacity
    }
}

impl<T> Consumer<T> {
    /// Removes the oldest value, or `None` when empty. Never blocks.
    pub fn pop(&mut self) -> Option<T> {
        let ring = &*self.ring;
        let head = ring.head.load(Ordering::Relaxed);
        let tail = ring.tail.load(Ordering::Acquire);
        if tail == head {
            return None;
        }
        let value = unsafe { (*ring.buf[head % ring.capacity].get()).assume_init_read() };
        ring.head.store(head.wrapping_add(1), Ordering::Release);
        Some(value)
    }

    pub fn is_empty(&self) -> bool {
        let ring = &*self.ring;
        ring.tail.load(Ordering::Acquire) == ring.head.load(Ordering::Relaxed)
    }
}
