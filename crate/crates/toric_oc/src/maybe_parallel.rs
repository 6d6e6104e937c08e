//! Iterate in parallel when the `parallel` feature is on, sequentially otherwise.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub trait IntoMaybeParallelIterator: IntoParallelIterator {
    fn into_maybe_par_iter(self) -> Self::Iter;
}

#[cfg(feature = "parallel")]
impl<I: IntoParallelIterator> IntoMaybeParallelIterator for I {
    fn into_maybe_par_iter(self) -> Self::Iter {
        self.into_par_iter()
    }
}

#[cfg(not(feature = "parallel"))]
pub trait IntoMaybeParallelIterator: IntoIterator {
    fn into_maybe_par_iter(self) -> Self::IntoIter;
}

#[cfg(not(feature = "parallel"))]
impl<I: IntoIterator> IntoMaybeParallelIterator for I {
    fn into_maybe_par_iter(self) -> Self::IntoIter {
        self.into_iter()
    }
}

#[cfg(feature = "parallel")]
pub trait IntoMaybeParallelRefIterator<'data>: IntoParallelRefIterator<'data> {
    fn maybe_par_iter(&'data self) -> Self::Iter;
}

#[cfg(feature = "parallel")]
impl<'data, I: 'data + IntoParallelRefIterator<'data> + ?Sized> IntoMaybeParallelRefIterator<'data> for I {
    fn maybe_par_iter(&'data self) -> Self::Iter {
        self.par_iter()
    }
}

#[cfg(not(feature = "parallel"))]
pub trait IntoMaybeParallelRefIterator<'data> {
    type Iter: Iterator;
    fn maybe_par_iter(&'data self) -> Self::Iter;
}

#[cfg(not(feature = "parallel"))]
impl<'data, I: 'data + ?Sized> IntoMaybeParallelRefIterator<'data> for I
where
    &'data I: IntoIterator,
{
    type Iter = <&'data I as IntoIterator>::IntoIter;
    fn maybe_par_iter(&'data self) -> Self::Iter {
        self.into_iter()
    }
}

/// True when this build evaluates graph sums on the rayon pool.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
