#include <cstddef>
#include <cmath>
#define __global__
#define __device__
#define __host__
#define __shared__
#define __constant__
#define __managed__
#define __restrict__
#define __forceinline__ inline
#define __noinline__
#define __launch_bounds__(...)
struct dim3 { unsigned int x, y, z; dim3(unsigned int a = 1, unsigned int b = 1, unsigned int c = 1) : x(a), y(b), z(c) {} };
extern const dim3 threadIdx, blockIdx, blockDim, gridDim;
extern const int warpSize;
inline void __syncthreads() {}
inline void __syncwarp(unsigned int = 0xffffffffu) {}
inline void __threadfence() {}
inline void __threadfence_block() {}
template <class A, class B> A atomicAdd(A *p, B v) { A o = *p; *p += v; return o; }
template <class A, class B> A atomicSub(A *p, B v) { A o = *p; *p -= v; return o; }
template <class A, class B> A atomicExch(A *p, B v) { A o = *p; *p = v; return o; }
template <class A, class B> A atomicMin(A *p, B v) { A o = *p; if (v < o) *p = v; return o; }
template <class A, class B> A atomicMax(A *p, B v) { A o = *p; if (v > o) *p = v; return o; }
template <class A, class B> A atomicCAS(A *p, B c, B v) { A o = *p; if (o == c) *p = v; return o; }
template <class A> A __ldg(const A *p) { return *p; }
typedef int cudaError_t;
typedef void *cudaStream_t;
const cudaError_t cudaSuccess = 0;
enum cudaMemcpyKind { cudaMemcpyHostToHost, cudaMemcpyHostToDevice, cudaMemcpyDeviceToHost, cudaMemcpyDeviceToDevice };
template <class P> cudaError_t cudaMalloc(P **p, std::size_t n);
template <class P> cudaError_t cudaMallocManaged(P **p, std::size_t n);
cudaError_t cudaMemcpy(void *dst, const void *src, std::size_t n, cudaMemcpyKind kind);
cudaError_t cudaMemset(void *p, int v, std::size_t n);
cudaError_t cudaFree(void *p);
cudaError_t cudaDeviceSynchronize();
cudaError_t cudaGetLastError();
