//! Executor-bound contiguous storage and the triplet assembly buffer.

use std::fmt;

use crate::error::{Error, Result};
use crate::executor::Executor;
use crate::instrument;

/// Scalar type used throughout the library.
pub type Scalar = f64;

/// Index type for sparse structure arrays.
pub type Index = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Dim {
    pub rows: usize,
    pub cols: usize,
}

impl Dim {
    pub const fn new(rows: usize, cols: usize) -> Self {
        Dim { rows, cols }
    }

    pub const fn square(n: usize) -> Self {
        Dim { rows: n, cols: n }
    }

    pub const fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ownership {
    Owning,
    Borrowed,
    BorrowedConst,
}

enum Storage<'a, T> {
    Owning(Vec<T>),
    Borrowed(&'a mut [T]),
    BorrowedConst(&'a [T]),
}

/// Contiguous typed storage bound to an executor.
///
/// An owning array holds its own allocation; a view aliases storage owned by
/// somebody else and never frees it. Shared ownership is expressed by
/// wrapping the owner in an `Arc`.
pub struct Array<'a, T> {
    exec: Executor,
    storage: Storage<'a, T>,
}

impl<T: Copy + Default + Send + Sync> Array<'static, T> {
    /// Allocates `size` zero-initialized (`T::default()`) elements.
    pub fn new(exec: &Executor, size: usize) -> Result<Self> {
        let mut data = Vec::new();
        data.try_reserve_exact(size)
            .map_err(|_| Error::Resource(size))?;
        data.resize(size, T::default());
        Ok(Self::from_vec(exec, data))
    }

    pub fn from_vec(exec: &Executor, data: Vec<T>) -> Self {
        Array {
            exec: exec.clone(),
            storage: Storage::Owning(data),
        }
    }

    /// Consumes an owning array and returns its storage.
    pub fn into_vec(self) -> Vec<T> {
        match self.storage {
            Storage::Owning(v) => v,
            _ => unreachable!("'static arrays are always owning"),
        }
    }
}

impl<'a, T: Copy + Default + Send + Sync> Array<'a, T> {
    /// Non-owning, mutable view over the first `size` elements of `storage`.
    /// No element is copied.
    pub fn view(exec: &Executor, size: usize, storage: &'a mut [T]) -> Result<Self> {
        check_view_len(size, storage.len())?;
        Ok(Array {
            exec: exec.clone(),
            storage: Storage::Borrowed(&mut storage[..size]),
        })
    }

    /// Non-owning, read-only view over the first `size` elements of `storage`.
    pub fn const_view(exec: &Executor, size: usize, storage: &'a [T]) -> Result<Self> {
        check_view_len(size, storage.len())?;
        Ok(Array {
            exec: exec.clone(),
            storage: Storage::BorrowedConst(&storage[..size]),
        })
    }

    pub fn executor(&self) -> &Executor {
        &self.exec
    }

    pub fn ownership(&self) -> Ownership {
        match self.storage {
            Storage::Owning(_) => Ownership::Owning,
            Storage::Borrowed(_) => Ownership::Borrowed,
            Storage::BorrowedConst(_) => Ownership::BorrowedConst,
        }
    }

    pub fn len(&self) -> usize {
        self.as_slice().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_slice(&self) -> &[T] {
        match &self.storage {
            Storage::Owning(v) => v,
            Storage::Borrowed(s) => s,
            Storage::BorrowedConst(s) => s,
        }
    }

    /// Mutable access; fails with [`Error::ReadOnly`] on a const view.
    pub fn as_mut_slice(&mut self) -> Result<&mut [T]> {
        match &mut self.storage {
            Storage::Owning(v) => Ok(v),
            Storage::Borrowed(s) => Ok(s),
            Storage::BorrowedConst(_) => Err(Error::ReadOnly),
        }
    }

    pub fn get(&self, i: usize) -> Option<T> {
        self.as_slice().get(i).copied()
    }

    pub fn set(&mut self, i: usize, value: T) -> Result<()> {
        let len = self.len();
        let slot = self
            .as_mut_slice()?
            .get_mut(i)
            .ok_or_else(|| Error::InvalidArgument(format!("index {i} out of bounds for {len}")))?;
        *slot = value;
        Ok(())
    }

    /// Copies the contents into a new owning array on `exec`. Any aliasing
    /// with the source is severed.
    pub fn copy_to(&self, exec: &Executor) -> Result<Array<'static, T>> {
        let mut out = Array::new(exec, self.len())?;
        exec.copy_elements(self.as_slice(), out.as_mut_slice()?)?;
        instrument::record_array_copy(self.len());
        Ok(out)
    }

    pub fn to_vec(&self) -> Vec<T> {
        self.as_slice().to_vec()
    }
}

fn check_view_len(size: usize, available: usize) -> Result<()> {
    if available < size {
        return Err(Error::InvalidArgument(format!(
            "view of {size} elements over storage of {available}"
        )));
    }
    Ok(())
}

impl<T: fmt::Debug> fmt::Debug for Array<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, data): (_, &[T]) = match &self.storage {
            Storage::Owning(v) => (Ownership::Owning, v),
            Storage::Borrowed(s) => (Ownership::Borrowed, s),
            Storage::BorrowedConst(s) => (Ownership::BorrowedConst, s),
        };
        f.debug_struct("Array")
            .field("exec", &self.exec.kind())
            .field("ownership", &kind)
            .field("data", &data)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triplet {
    pub row: Index,
    pub col: Index,
    pub value: Scalar,
}

/// Coordinate-format assembly buffer.
///
/// Entries keep their insertion order. Duplicate coordinates are allowed and
/// are summed by whoever consumes the buffer.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatrixData {
    size: Dim,
    nonzeros: Vec<Triplet>,
}

impl MatrixData {
    pub fn new(size: Dim) -> Self {
        MatrixData {
            size,
            nonzeros: Vec::new(),
        }
    }

    pub fn from_triplets(
        size: Dim,
        triplets: impl IntoIterator<Item = (Index, Index, Scalar)>,
    ) -> Result<Self> {
        let mut md = MatrixData::new(size);
        for (r, c, v) in triplets {
            md.add(r, c, v)?;
        }
        Ok(md)
    }

    pub fn add(&mut self, row: Index, col: Index, value: Scalar) -> Result<()> {
        if row >= self.size.rows || col >= self.size.cols {
            return Err(Error::InvalidArgument(format!(
                "entry ({row}, {col}) outside a {} matrix",
                self.size
            )));
        }
        self.nonzeros.push(Triplet { row, col, value });
        Ok(())
    }

    pub fn size(&self) -> Dim {
        self.size
    }

    pub fn nonzeros(&self) -> &[Triplet] {
        &self.nonzeros
    }

    pub fn len(&self) -> usize {
        self.nonzeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nonzeros.is_empty()
    }
}
