//! The draw-stream abstraction consumed by the estimators.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::num::Real;
use crate::rng::RngStream;

/// An iid stream of draws of some random variable `X`.
///
/// Implementations hold no mutable draw state: all randomness comes from the
/// [`RngStream`] handed in, so one source can serve concurrent invocations.
pub trait SampleSource<T: Real>: Send + Sync {
    fn draw(&self, rng: &mut RngStream) -> T;

    /// `family:params` description.
    fn descriptor(&self) -> String;

    /// Exact `E[X]`, when known.
    fn true_mean(&self) -> Option<T> {
        None
    }

    /// Exact `sd(X)/E[X]`, when known.
    fn true_c(&self) -> Option<T> {
        None
    }
}

impl<T: Real, S: SampleSource<T> + ?Sized> SampleSource<T> for &S {
    fn draw(&self, rng: &mut RngStream) -> T {
        (**self).draw(rng)
    }

    fn descriptor(&self) -> String {
        (**self).descriptor()
    }

    fn true_mean(&self) -> Option<T> {
        (**self).true_mean()
    }

    fn true_c(&self) -> Option<T> {
        (**self).true_c()
    }
}

impl<T: Real, S: SampleSource<T> + ?Sized> SampleSource<T> for Box<S> {
    fn draw(&self, rng: &mut RngStream) -> T {
        (**self).draw(rng)
    }

    fn descriptor(&self) -> String {
        (**self).descriptor()
    }

    fn true_mean(&self) -> Option<T> {
        (**self).true_mean()
    }

    fn true_c(&self) -> Option<T> {
        (**self).true_c()
    }
}

/// Counts every draw taken from the wrapped source.
#[derive(Debug)]
pub struct Counting<S> {
    inner: S,
    count: AtomicU64,
}

impl<S> Counting<S> {
    pub fn new(inner: S) -> Self {
        Self { inner, count: AtomicU64::new(0) }
    }

    pub fn count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}

impl<T: Real, S: SampleSource<T>> SampleSource<T> for Counting<S> {
    fn draw(&self, rng: &mut RngStream) -> T {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.draw(rng)
    }

    fn descriptor(&self) -> String {
        self.inner.descriptor()
    }

    fn true_mean(&self) -> Option<T> {
        self.inner.true_mean()
    }

    fn true_c(&self) -> Option<T> {
        self.inner.true_c()
    }
}

/// `λ·X` for a fixed `λ > 0`.
#[derive(Debug, Clone)]
pub struct Scaled<S, T> {
    inner: S,
    factor: T,
}

impl<S, T: Real> Scaled<S, T> {
    pub fn new(inner: S, factor: T) -> Self {
        Self { inner, factor }
    }
}

impl<T: Real, S: SampleSource<T>> SampleSource<T> for Scaled<S, T> {
    fn draw(&self, rng: &mut RngStream) -> T {
        self.inner.draw(rng) * self.factor
    }

    fn descriptor(&self) -> String {
        format!("{}*{}", self.factor, self.inner.descriptor())
    }

    fn true_mean(&self) -> Option<T> {
        self.inner.true_mean().map(|m| m * self.factor)
    }

    fn true_c(&self) -> Option<T> {
        self.inner.true_c()
    }
}

/// Source defined by a closure; handy in tests.
pub struct FnSource<F> {
    name: String,
    f: F,
}

impl<F> FnSource<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        Self { name: name.into(), f }
    }
}

impl<T: Real, F: Fn(&mut RngStream) -> T + Send + Sync> SampleSource<T> for FnSource<F> {
    fn draw(&self, rng: &mut RngStream) -> T {
        (self.f)(rng)
    }

    fn descriptor(&self) -> String {
        self.name.clone()
    }
}
