// Port of M. J. D. Powell's COBYLA (Constrained Optimization BY Linear
// Approximations, 1992 Fortran 77 release). The control flow, variable
// names and comments follow the original so the port can be checked against
// it line by line; arrays keep the original 1-based indexing.

#include "vqc/cobyla.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace vqc {

namespace detail {

namespace {

// 1-based dense matrix; row 0 / column 0 are unused.
class Mat {
public:
    Mat(int rows, int cols) : cols_(cols + 1), v_(static_cast<std::size_t>(rows + 1) * (cols + 1), 0.0) {}
    double& operator()(int i, int j) { return v_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return v_[static_cast<std::size_t>(i) * cols_ + j]; }

private:
    std::size_t cols_;
    std::vector<double> v_;
};

using Vec = std::vector<double>;  // 1-based, element 0 unused
using IVec = std::vector<int>;

// This subroutine calculates an N-component vector DX by applying the
// following two stages. In the first stage, DX is set to the shortest vector
// that minimizes the greatest violation of the constraints
//   A(1,K)*DX(1)+A(2,K)*DX(2)+...+A(N,K)*DX(N) >= B(K), K = 2,3,...,M,
// subject to the Euclidean length of DX being at most RHO. If its length is
// strictly less than RHO, then the resultant freedom in DX is used to
// minimize the objective function
//   -A(1,M+1)*DX(1) - A(2,M+1)*DX(2) - ... - A(N,M+1)*DX(N)
// subject to no increase in any greatest constraint violation. The two
// stages are distinguished by MCON == M and MCON > M respectively.
//
// IACT(1..NACT) index the active constraints; Z is an orthogonal matrix
// whose first NACT columns come from Gram-Schmidt on the active constraint
// gradients, ZDOTA(J) being the scalar product of column J of Z with the
// gradient of the J-th active constraint. VMULTC holds the nonnegative
// Lagrange multipliers of the active constraints followed by the shifted
// residuals of the inactive ones.
void trstlp(int n, int m, const Mat& a, const Vec& b, double rho, Vec& dx, int& ifull, IVec& iact) {
    Mat z(n, n);
    Vec zdota(static_cast<std::size_t>(n) + 1, 0.0);
    Vec vmultc(static_cast<std::size_t>(m) + 2, 0.0);
    Vec sdirn(static_cast<std::size_t>(n) + 1, 0.0);
    Vec dxnew(static_cast<std::size_t>(n) + 1, 0.0);
    Vec vmultd(static_cast<std::size_t>(m) + 2, 0.0);

    int mcon, nact, icon, i, j, k, nactx = 0, isave, kk, kw, kp, kl, icount;
    double resmax, optold, optnew, tot, temp, alpha, beta, sp, spabs, acca, accb, ratio, zdotv,
        zdvabs, vsave, dd, ss, sd, stpful, step, zdotw, zdwabs, resold = 0.0, sumabs, sum, tempa;

    ifull = 1;
    mcon = m;
    nact = 0;
    resmax = 0.0;
    icon = 0;
    for (i = 1; i <= n; ++i) {
        for (j = 1; j <= n; ++j) z(i, j) = 0.0;
        z(i, i) = 1.0;
        dx[i] = 0.0;
    }
    if (m >= 1) {
        for (k = 1; k <= m; ++k) {
            if (b[k] > resmax) {
                resmax = b[k];
                icon = k;
            }
        }
        for (k = 1; k <= m; ++k) {
            iact[k] = k;
            vmultc[k] = resmax - b[k];
        }
    }
    if (resmax == 0.0) goto line_480;
    for (i = 1; i <= n; ++i) sdirn[i] = 0.0;

    // End the current stage of the calculation if 3 consecutive iterations
    // have either failed to reduce the best calculated value of the
    // objective function or to increase the number of active constraints
    // since the best value was calculated. This strategy prevents cycling.
line_60:
    optold = 0.0;
    icount = 0;
line_70:
    if (mcon == m) {
        optnew = resmax;
    } else {
        optnew = 0.0;
        for (i = 1; i <= n; ++i) optnew -= dx[i] * a(i, mcon);
    }
    if (icount == 0 || optnew < optold) {
        optold = optnew;
        nactx = nact;
        icount = 3;
    } else if (nact > nactx) {
        nactx = nact;
        icount = 3;
    } else {
        --icount;
        if (icount == 0) goto line_490;
    }

    // If ICON exceeds NACT, then we add the constraint with index IACT(ICON)
    // to the active set. Apply Givens rotations so that the last N-NACT-1
    // columns of Z are orthogonal to the gradient of the new constraint, a
    // scalar product being set to zero if its nonzero value could be due to
    // computer rounding errors.
    if (icon <= nact) goto line_260;
    kk = iact[icon];
    for (i = 1; i <= n; ++i) dxnew[i] = a(i, kk);
    tot = 0.0;
    k = n;
line_100:
    if (k > nact) {
        sp = 0.0;
        spabs = 0.0;
        for (i = 1; i <= n; ++i) {
            temp = z(i, k) * dxnew[i];
            sp += temp;
            spabs += std::fabs(temp);
        }
        acca = spabs + 0.1 * std::fabs(sp);
        accb = spabs + 0.2 * std::fabs(sp);
        if (spabs >= acca || acca >= accb) sp = 0.0;
        if (tot == 0.0) {
            tot = sp;
        } else {
            kp = k + 1;
            temp = std::sqrt(sp * sp + tot * tot);
            alpha = sp / temp;
            beta = tot / temp;
            tot = temp;
            for (i = 1; i <= n; ++i) {
                temp = alpha * z(i, k) + beta * z(i, kp);
                z(i, kp) = alpha * z(i, kp) - beta * z(i, k);
                z(i, k) = temp;
            }
        }
        --k;
        goto line_100;
    }

    // Add the new constraint if this can be done without a deletion from the
    // active set.
    if (tot != 0.0) {
        ++nact;
        zdota[nact] = tot;
        vmultc[icon] = vmultc[nact];
        vmultc[nact] = 0.0;
        goto line_210;
    }

    // The next instruction is reached if a deletion has to be made from the
    // active set in order to make room for the new active constraint, because
    // the new constraint gradient is a linear combination of the gradients of
    // the old active constraints. Set the elements of VMULTD to the
    // multipliers of the linear combination.
    ratio = -1.0;
    k = nact;
line_130:
    zdotv = 0.0;
    zdvabs = 0.0;
    for (i = 1; i <= n; ++i) {
        temp = z(i, k) * dxnew[i];
        zdotv += temp;
        zdvabs += std::fabs(temp);
    }
    acca = zdvabs + 0.1 * std::fabs(zdotv);
    accb = zdvabs + 0.2 * std::fabs(zdotv);
    if (zdvabs < acca && acca < accb) {
        temp = zdotv / zdota[k];
        if (temp > 0.0 && iact[k] <= m) {
            tempa = vmultc[k] / temp;
            if (ratio < 0.0 || tempa < ratio) ratio = tempa;
        }
        if (k >= 2) {
            kw = iact[k];
            for (i = 1; i <= n; ++i) dxnew[i] -= temp * a(i, kw);
        }
        vmultd[k] = temp;
    } else {
        vmultd[k] = 0.0;
    }
    --k;
    if (k > 0) goto line_130;
    if (ratio < 0.0) goto line_490;

    // Revise the Lagrange multipliers and reorder the active constraints so
    // that the one to be replaced is at the end of the list.
    for (k = 1; k <= nact; ++k) vmultc[k] = std::fmax(0.0, vmultc[k] - ratio * vmultd[k]);
    if (icon < nact) {
        isave = iact[icon];
        vsave = vmultc[icon];
        k = icon;
    line_170:
        kp = k + 1;
        kw = iact[kp];
        sp = 0.0;
        for (i = 1; i <= n; ++i) sp += z(i, k) * a(i, kw);
        temp = std::sqrt(sp * sp + zdota[kp] * zdota[kp]);
        alpha = zdota[kp] / temp;
        beta = sp / temp;
        zdota[kp] = alpha * zdota[k];
        zdota[k] = temp;
        for (i = 1; i <= n; ++i) {
            temp = alpha * z(i, kp) + beta * z(i, k);
            z(i, kp) = alpha * z(i, k) - beta * z(i, kp);
            z(i, k) = temp;
        }
        iact[k] = kw;
        vmultc[k] = vmultc[kp];
        k = kp;
        if (k < nact) goto line_170;
        iact[k] = isave;
        vmultc[k] = vsave;
    }
    temp = 0.0;
    for (i = 1; i <= n; ++i) temp += z(i, nact) * a(i, kk);
    if (temp == 0.0) goto line_490;
    zdota[nact] = temp;
    vmultc[icon] = 0.0;
    vmultc[nact] = ratio;

    // Update IACT and ensure that the objective function continues to be
    // treated as the last active constraint when MCON > M.
line_210:
    iact[icon] = iact[nact];
    iact[nact] = kk;
    if (mcon > m && kk != mcon) {
        k = nact - 1;
        sp = 0.0;
        for (i = 1; i <= n; ++i) sp += z(i, k) * a(i, kk);
        temp = std::sqrt(sp * sp + zdota[nact] * zdota[nact]);
        alpha = zdota[nact] / temp;
        beta = sp / temp;
        zdota[nact] = alpha * zdota[k];
        zdota[k] = temp;
        for (i = 1; i <= n; ++i) {
            temp = alpha * z(i, nact) + beta * z(i, k);
            z(i, nact) = alpha * z(i, k) - beta * z(i, nact);
            z(i, k) = temp;
        }
        iact[nact] = iact[k];
        iact[k] = kk;
        temp = vmultc[k];
        vmultc[k] = vmultc[nact];
        vmultc[nact] = temp;
    }

    // If stage one is in progress, then set SDIRN to the direction of the
    // next change to the current vector of variables.
    if (mcon > m) goto line_320;
    kk = iact[nact];
    temp = 0.0;
    for (i = 1; i <= n; ++i) temp += sdirn[i] * a(i, kk);
    temp -= 1.0;
    temp /= zdota[nact];
    for (i = 1; i <= n; ++i) sdirn[i] -= temp * z(i, nact);
    goto line_340;

    // Delete the constraint that has the index IACT(ICON) from the active
    // set.
line_260:
    if (icon < nact) {
        isave = iact[icon];
        vsave = vmultc[icon];
        k = icon;
    line_270:
        kp = k + 1;
        kk = iact[kp];
        sp = 0.0;
        for (i = 1; i <= n; ++i) sp += z(i, k) * a(i, kk);
        temp = std::sqrt(sp * sp + zdota[kp] * zdota[kp]);
        alpha = zdota[kp] / temp;
        beta = sp / temp;
        zdota[kp] = alpha * zdota[k];
        zdota[k] = temp;
        for (i = 1; i <= n; ++i) {
            temp = alpha * z(i, kp) + beta * z(i, k);
            z(i, kp) = alpha * z(i, k) - beta * z(i, kp);
            z(i, k) = temp;
        }
        iact[k] = kk;
        vmultc[k] = vmultc[kp];
        k = kp;
        if (k < nact) goto line_270;
        iact[k] = isave;
        vmultc[k] = vsave;
    }
    --nact;

    // If stage one is in progress, then set SDIRN to the direction of the
    // next change to the current vector of variables.
    if (mcon > m) goto line_320;
    temp = 0.0;
    for (i = 1; i <= n; ++i) temp += sdirn[i] * z(i, nact + 1);
    for (i = 1; i <= n; ++i) sdirn[i] -= temp * z(i, nact + 1);
    goto line_340;

    // Pick the next search direction of stage two.
line_320:
    temp = 1.0 / zdota[nact];
    for (i = 1; i <= n; ++i) sdirn[i] = temp * z(i, nact);

    // Calculate the step to the boundary of the trust region or take the
    // step that reduces RESMAX to zero. The two statements below that include
    // the factor 1.0E-6 prevent some harmless underflows that occurred in a
    // test calculation; the step is skipped if it could be zero within a
    // reasonable tolerance for computer rounding errors.
line_340:
    dd = rho * rho;
    sd = 0.0;
    ss = 0.0;
    for (i = 1; i <= n; ++i) {
        if (std::fabs(dx[i]) >= 1.0e-6 * rho) dd -= dx[i] * dx[i];
        sd += dx[i] * sdirn[i];
        ss += sdirn[i] * sdirn[i];
    }
    if (dd <= 0.0) goto line_490;
    temp = std::sqrt(ss * dd);
    if (std::fabs(sd) >= 1.0e-6 * temp) temp = std::sqrt(ss * dd + sd * sd);
    stpful = dd / (temp + sd);
    step = stpful;
    if (mcon == m) {
        acca = step + 0.1 * resmax;
        accb = step + 0.2 * resmax;
        if (step >= acca || acca >= accb) goto line_480;
        step = std::fmin(step, resmax);
    }

    // Set DXNEW to the new variables if STEP is the steplength, and reduce
    // RESMAX to the corresponding maximum residual if stage one is being
    // done.
    for (i = 1; i <= n; ++i) dxnew[i] = dx[i] + step * sdirn[i];
    if (mcon == m) {
        resold = resmax;
        resmax = 0.0;
        for (k = 1; k <= nact; ++k) {
            kk = iact[k];
            temp = b[kk];
            for (i = 1; i <= n; ++i) temp -= a(i, kk) * dxnew[i];
            resmax = std::fmax(resmax, temp);
        }
    }

    // Set VMULTD to the VMULTC vector that would occur if DX became DXNEW. A
    // device is included to force VMULTD(K) = 0 if deviations from this value
    // can be attributed to computer rounding errors.
    k = nact;
line_390:
    zdotw = 0.0;
    zdwabs = 0.0;
    for (i = 1; i <= n; ++i) {
        temp = z(i, k) * dxnew[i];
        zdotw += temp;
        zdwabs += std::fabs(temp);
    }
    acca = zdwabs + 0.1 * std::fabs(zdotw);
    accb = zdwabs + 0.2 * std::fabs(zdotw);
    if (zdwabs >= acca || acca >= accb) zdotw = 0.0;
    vmultd[k] = zdotw / zdota[k];
    if (k >= 2) {
        kk = iact[k];
        for (i = 1; i <= n; ++i) dxnew[i] -= vmultd[k] * a(i, kk);
        --k;
        goto line_390;
    }
    if (mcon > m) vmultd[nact] = std::fmax(0.0, vmultd[nact]);

    // Complete VMULTD by finding the new constraint residuals.
    for (i = 1; i <= n; ++i) dxnew[i] = dx[i] + step * sdirn[i];
    if (mcon > nact) {
        kl = nact + 1;
        for (k = kl; k <= mcon; ++k) {
            kk = iact[k];
            sum = resmax - b[kk];
            sumabs = resmax + std::fabs(b[kk]);
            for (i = 1; i <= n; ++i) {
                temp = a(i, kk) * dxnew[i];
                sum += temp;
                sumabs += std::fabs(temp);
            }
            acca = sumabs + 0.1 * std::fabs(sum);
            accb = sumabs + 0.2 * std::fabs(sum);
            if (sumabs >= acca || acca >= accb) sum = 0.0;
            vmultd[k] = sum;
        }
    }

    // Calculate the fraction of the step from DX to DXNEW that will be
    // taken.
    ratio = 1.0;
    icon = 0;
    for (k = 1; k <= mcon; ++k) {
        if (vmultd[k] < 0.0) {
            temp = vmultc[k] / (vmultc[k] - vmultd[k]);
            if (temp < ratio) {
                ratio = temp;
                icon = k;
            }
        }
    }

    // Update DX, VMULTC and RESMAX.
    temp = 1.0 - ratio;
    for (i = 1; i <= n; ++i) dx[i] = temp * dx[i] + ratio * dxnew[i];
    for (k = 1; k <= mcon; ++k) vmultc[k] = std::fmax(0.0, temp * vmultc[k] + ratio * vmultd[k]);
    if (mcon == m) resmax = resold + ratio * (resmax - resold);

    // If the full step is not acceptable then begin another iteration.
    // Otherwise switch to stage two or end the calculation.
    if (icon > 0) goto line_70;
    if (step == stpful) goto line_500;
line_480:
    mcon = m + 1;
    icon = mcon;
    iact[mcon] = mcon;
    vmultc[mcon] = 0.0;
    goto line_60;

    // We employ any freedom that may be available to reduce the objective
    // function before returning a DX whose length is less than RHO.
line_490:
    if (mcon == m) goto line_480;
    ifull = 0;
line_500:
    return;
}

}  // namespace

void cobyla(int n, int m, std::vector<double>& x0, double rhobeg, double rhoend, int& maxfun,
            const CalcFc& calcfc) {
    const int np = n + 1;
    const int mp = m + 1;
    const int mpp = m + 2;

    // 1-based working copies; the last column of SIM holds the optimal
    // vertex of the current simplex and the preceding N columns hold the
    // displacements from it to the other vertices. SIMI is the inverse of
    // the leading N x N part of SIM.
    Vec x(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 1; i <= n; ++i) x[i] = x0[static_cast<std::size_t>(i) - 1];
    Vec con(static_cast<std::size_t>(mpp) + 1, 0.0);
    Mat sim(n, np), simi(n, n), datmat(mpp, np), a(n, mp);
    Vec vsig(static_cast<std::size_t>(n) + 1, 0.0), veta(static_cast<std::size_t>(n) + 1, 0.0),
        sigbar(static_cast<std::size_t>(n) + 1, 0.0), dx(static_cast<std::size_t>(n) + 1, 0.0),
        w(static_cast<std::size_t>(n) + 1, 0.0);
    IVec iact(static_cast<std::size_t>(mp) + 1, 0);

    int i, j, k, nbest, l, iflag = 0, ifull = 1, jdrop, ibrnch, nfvals;
    double resmax, phimin, tempa, error, parsig = 0.0, pareta = 0.0, wsig, weta, cvmaxp, cvmaxm,
        sum = 0.0, dxsign, resnew, barmu, phi, prerec = 0.0, prerem = 0.0, vmold, vmnew, trured,
        ratio, edgmax, denom, cmin = 0.0, cmax = 0.0, f = 0.0, temp;

    const double alpha = 0.25;
    const double beta = 2.1;
    const double gamma = 0.5;
    const double delta = 1.1;
    double rho = rhobeg;
    double parmu = 0.0;

    nfvals = 0;
    temp = 1.0 / rho;
    for (i = 1; i <= n; ++i) {
        sim(i, np) = x[i];
        for (j = 1; j <= n; ++j) simi(i, j) = 0.0;
        sim(i, i) = rho;
        simi(i, i) = temp;
    }
    jdrop = np;
    ibrnch = 0;

    // Make the next call of the user-supplied objective. These instructions
    // are also used for calling it during the iterations of the algorithm.
line_40:
    if (nfvals >= maxfun && nfvals > 0) goto line_600;
    ++nfvals;
    f = calcfc(std::span<const double>(x.data() + 1, static_cast<std::size_t>(n)),
               std::span<double>(con.data() + 1, static_cast<std::size_t>(m)));
    resmax = 0.0;
    if (m > 0)
        for (k = 1; k <= m; ++k) resmax = std::fmax(resmax, -con[k]);
    con[mp] = f;
    con[mpp] = resmax;
    if (ibrnch == 1) goto line_440;

    // Set the recently calculated function values in a column of DATMAT. This
    // array has a column for each vertex of the current simplex, the entries
    // of each column being the values of the constraint functions (if any)
    // followed by the objective function and the greatest constraint
    // violation at the vertex.
    for (k = 1; k <= mpp; ++k) datmat(k, jdrop) = con[k];
    if (nfvals > np) goto line_130;

    // Exchange the new vertex of the initial simplex with the optimal vertex
    // if necessary. Then, if the initial simplex is not complete, pick its
    // next vertex and calculate the function values there.
    if (jdrop <= n) {
        if (datmat(mp, np) <= f) {
            x[jdrop] = sim(jdrop, np);
        } else {
            sim(jdrop, np) = x[jdrop];
            for (k = 1; k <= mpp; ++k) {
                datmat(k, jdrop) = datmat(k, np);
                datmat(k, np) = con[k];
            }
            for (k = 1; k <= jdrop; ++k) {
                sim(jdrop, k) = -rho;
                temp = 0.0;
                for (i = k; i <= jdrop; ++i) temp -= simi(i, k);
                simi(jdrop, k) = temp;
            }
        }
    }
    if (nfvals <= n) {
        jdrop = nfvals;
        x[jdrop] += rho;
        goto line_40;
    }
line_130:
    ibrnch = 1;

    // Identify the optimal vertex of the current simplex.
line_140:
    phimin = datmat(mp, np) + parmu * datmat(mpp, np);
    nbest = np;
    for (j = 1; j <= n; ++j) {
        temp = datmat(mp, j) + parmu * datmat(mpp, j);
        if (temp < phimin) {
            nbest = j;
            phimin = temp;
        } else if (temp == phimin && parmu == 0.0) {
            if (datmat(mpp, j) < datmat(mpp, nbest)) nbest = j;
        }
    }

    // Switch the best vertex into pole position if it is not there already,
    // and also update SIM, SIMI and DATMAT.
    if (nbest <= n) {
        for (i = 1; i <= mpp; ++i) {
            temp = datmat(i, np);
            datmat(i, np) = datmat(i, nbest);
            datmat(i, nbest) = temp;
        }
        for (i = 1; i <= n; ++i) {
            temp = sim(i, nbest);
            sim(i, nbest) = 0.0;
            sim(i, np) += temp;
            tempa = 0.0;
            for (k = 1; k <= n; ++k) {
                sim(i, k) -= temp;
                tempa -= simi(k, i);
            }
            simi(nbest, i) = tempa;
        }
    }

    // Make an error return if SIMI is a poor approximation to the inverse of
    // the leading N by N submatrix of SIM.
    error = 0.0;
    for (i = 1; i <= n; ++i) {
        for (j = 1; j <= n; ++j) {
            temp = (i == j) ? -1.0 : 0.0;
            for (k = 1; k <= n; ++k) temp += simi(i, k) * sim(k, j);
            error = std::fmax(error, std::fabs(temp));
        }
    }
    if (error > 0.1) goto line_600;

    // Calculate the coefficients of the linear approximations to the
    // objective and constraint functions, placing minus the objective
    // function gradient after the constraint gradients in the array A.
    for (k = 1; k <= mp; ++k) {
        con[k] = -datmat(k, np);
        for (j = 1; j <= n; ++j) w[j] = datmat(k, j) + con[k];
        for (i = 1; i <= n; ++i) {
            temp = 0.0;
            for (j = 1; j <= n; ++j) temp += w[j] * simi(j, i);
            a(i, k) = (k == mp) ? -temp : temp;
        }
    }

    // Calculate the values of sigma and eta, and set IFLAG = 0 if the
    // current simplex is not acceptable.
    iflag = 1;
    parsig = alpha * rho;
    pareta = beta * rho;
    for (j = 1; j <= n; ++j) {
        wsig = 0.0;
        weta = 0.0;
        for (i = 1; i <= n; ++i) {
            wsig += simi(j, i) * simi(j, i);
            weta += sim(i, j) * sim(i, j);
        }
        vsig[j] = 1.0 / std::sqrt(wsig);
        veta[j] = std::sqrt(weta);
        if (vsig[j] < parsig || veta[j] > pareta) iflag = 0;
    }

    // If a new vertex is needed to improve acceptability, then decide which
    // vertex to drop from the simplex.
    if (ibrnch == 1 || iflag == 1) goto line_370;
    jdrop = 0;
    temp = pareta;
    for (j = 1; j <= n; ++j) {
        if (veta[j] > temp) {
            jdrop = j;
            temp = veta[j];
        }
    }
    if (jdrop == 0) {
        for (j = 1; j <= n; ++j) {
            if (vsig[j] < temp) {
                jdrop = j;
                temp = vsig[j];
            }
        }
    }

    // Calculate the step to the new vertex and its sign.
    temp = gamma * rho * vsig[jdrop];
    for (i = 1; i <= n; ++i) dx[i] = temp * simi(jdrop, i);
    cvmaxp = 0.0;
    cvmaxm = 0.0;
    for (k = 1; k <= mp; ++k) {
        sum = 0.0;
        for (i = 1; i <= n; ++i) sum += a(i, k) * dx[i];
        if (k < mp) {
            temp = datmat(k, np);
            cvmaxp = std::fmax(cvmaxp, -sum - temp);
            cvmaxm = std::fmax(cvmaxm, sum - temp);
        }
    }
    dxsign = 1.0;
    if (parmu * (cvmaxp - cvmaxm) > sum + sum) dxsign = -1.0;

    // Update the elements of SIM and SIMI, and set the next X.
    temp = 0.0;
    for (i = 1; i <= n; ++i) {
        dx[i] = dxsign * dx[i];
        sim(i, jdrop) = dx[i];
        temp += simi(jdrop, i) * dx[i];
    }
    for (i = 1; i <= n; ++i) simi(jdrop, i) /= temp;
    for (j = 1; j <= n; ++j) {
        if (j != jdrop) {
            temp = 0.0;
            for (i = 1; i <= n; ++i) temp += simi(j, i) * dx[i];
            for (i = 1; i <= n; ++i) simi(j, i) -= temp * simi(jdrop, i);
        }
        x[j] = sim(j, np) + dx[j];
    }
    goto line_40;

    // Calculate DX = x(*) - x(0). Branch if the length of DX is less than
    // 0.5*RHO.
line_370:
    ifull = 0;
    trstlp(n, m, a, con, rho, dx, ifull, iact);
    if (ifull == 0) {
        temp = 0.0;
        for (i = 1; i <= n; ++i) temp += dx[i] * dx[i];
        if (temp < 0.25 * rho * rho) {
            ibrnch = 1;
            goto line_550;
        }
    }

    // Predict the change to F and the new maximum constraint violation if
    // the variables are altered from x(0) to x(0) + DX.
    resnew = 0.0;
    con[mp] = 0.0;
    for (k = 1; k <= mp; ++k) {
        sum = con[k];
        for (i = 1; i <= n; ++i) sum -= a(i, k) * dx[i];
        if (k < mp) resnew = std::fmax(resnew, sum);
    }

    // Increase PARMU if necessary and branch back if this change alters the
    // optimal vertex. Otherwise PREREM and PREREC will be set to the
    // predicted reductions in the merit function and the maximum constraint
    // violation respectively.
    barmu = 0.0;
    prerec = datmat(mpp, np) - resnew;
    if (prerec > 0.0) barmu = sum / prerec;
    if (parmu < 1.5 * barmu) {
        parmu = 2.0 * barmu;
        phi = datmat(mp, np) + parmu * datmat(mpp, np);
        for (j = 1; j <= n; ++j) {
            temp = datmat(mp, j) + parmu * datmat(mpp, j);
            if (temp < phi) goto line_140;
            if (temp == phi && parmu == 0.0) {
                if (datmat(mpp, j) < datmat(mpp, np)) goto line_140;
            }
        }
    }
    prerem = parmu * prerec - sum;

    // Calculate the constraint and objective functions at x(*). Then find
    // the actual reduction in the merit function.
    for (i = 1; i <= n; ++i) x[i] = sim(i, np) + dx[i];
    ibrnch = 1;
    goto line_40;
line_440:
    vmold = datmat(mp, np) + parmu * datmat(mpp, np);
    vmnew = f + parmu * resmax;
    trured = vmold - vmnew;
    if (parmu == 0.0 && f == datmat(mp, np)) {
        prerem = prerec;
        trured = datmat(mpp, np) - resmax;
    }

    // Begin the operations that decide whether x(*) should replace one of
    // the vertices of the current simplex, the change being mandatory if
    // TRURED is positive. Firstly, JDROP is set to the index of the vertex
    // that is to be replaced.
    ratio = (trured <= 0.0) ? 1.0 : 0.0;
    jdrop = 0;
    for (j = 1; j <= n; ++j) {
        temp = 0.0;
        for (i = 1; i <= n; ++i) temp += simi(j, i) * dx[i];
        temp = std::fabs(temp);
        if (temp > ratio) {
            jdrop = j;
            ratio = temp;
        }
        sigbar[j] = temp * vsig[j];
    }

    // Calculate the value of ell.
    edgmax = delta * rho;
    l = 0;
    for (j = 1; j <= n; ++j) {
        if (sigbar[j] >= parsig || sigbar[j] >= vsig[j]) {
            temp = veta[j];
            if (trured > 0.0) {
                temp = 0.0;
                for (i = 1; i <= n; ++i) {
                    const double d = dx[i] - sim(i, j);
                    temp += d * d;
                }
                temp = std::sqrt(temp);
            }
            if (temp > edgmax) {
                l = j;
                edgmax = temp;
            }
        }
    }
    if (l > 0) jdrop = l;
    if (jdrop == 0) goto line_550;

    // Revise the simplex by updating the elements of SIM, SIMI and DATMAT.
    temp = 0.0;
    for (i = 1; i <= n; ++i) {
        sim(i, jdrop) = dx[i];
        temp += simi(jdrop, i) * dx[i];
    }
    for (i = 1; i <= n; ++i) simi(jdrop, i) /= temp;
    for (j = 1; j <= n; ++j) {
        if (j != jdrop) {
            temp = 0.0;
            for (i = 1; i <= n; ++i) temp += simi(j, i) * dx[i];
            for (i = 1; i <= n; ++i) simi(j, i) -= temp * simi(jdrop, i);
        }
    }
    for (k = 1; k <= mpp; ++k) datmat(k, jdrop) = con[k];

    // Branch back for further iterations with the current RHO.
    if (trured > 0.0 && trured >= 0.1 * prerem) goto line_140;
line_550:
    if (iflag == 0) {
        ibrnch = 0;
        goto line_140;
    }

    // Otherwise reduce RHO if it is not at its least value and reset PARMU.
    if (rho > rhoend) {
        rho = 0.5 * rho;
        if (rho <= 1.5 * rhoend) rho = rhoend;
        if (parmu > 0.0) {
            denom = 0.0;
            for (k = 1; k <= mp; ++k) {
                cmin = datmat(k, np);
                cmax = cmin;
                for (i = 1; i <= n; ++i) {
                    cmin = std::fmin(cmin, datmat(k, i));
                    cmax = std::fmax(cmax, datmat(k, i));
                }
                if (k <= m && cmin < 0.5 * cmax) {
                    temp = std::fmax(cmax, 0.0) - cmin;
                    denom = (denom <= 0.0) ? temp : std::fmin(denom, temp);
                }
            }
            if (denom == 0.0) {
                parmu = 0.0;
            } else if (cmax - cmin < parmu * denom) {
                parmu = (cmax - cmin) / denom;
            }
        }
        goto line_140;
    }

    // Return the best calculated values of the variables.
    if (ifull == 1) goto line_620;
line_600:
    for (i = 1; i <= n; ++i) x[i] = sim(i, np);
line_620:
    maxfun = nfvals;
    for (i = 1; i <= n; ++i) x0[static_cast<std::size_t>(i) - 1] = x[i];
}

}  // namespace detail

namespace {

struct NonFiniteObjective {};

}  // namespace

CobylaResult cobyla_minimize(const std::function<double(std::span<const double>)>& objective,
                             std::vector<double> x0, double rho_begin, double rho_end,
                             int max_evals) {
    const int n = static_cast<int>(x0.size());
    if (n < 1) throw std::invalid_argument("cobyla_minimize: dimension must be >= 1");
    if (!(rho_begin > 0.0) || !(rho_end > 0.0) || rho_end > rho_begin)
        throw std::invalid_argument("cobyla_minimize: need 0 < rho_end <= rho_begin");
    if (max_evals < n + 2)
        throw std::invalid_argument("cobyla_minimize: max_evals must be >= dimension + 2");

    CobylaResult best;
    best.f = std::numeric_limits<double>::infinity();

    auto calcfc = [&](std::span<const double> x, std::span<double>) -> double {
        const double v = objective(x);
        ++best.evaluations;
        if (!std::isfinite(v)) throw NonFiniteObjective{};
        if (v < best.f) {
            best.f = v;
            best.x.assign(x.begin(), x.end());
        }
        return v;
    };

    int maxfun = max_evals;
    try {
        detail::cobyla(n, 0, x0, rho_begin, rho_end, maxfun, calcfc);
    } catch (const NonFiniteObjective&) {
        best.aborted_nonfinite = true;
    }
    if (best.x.empty()) {
        // The very first evaluation was non-finite; report the start point.
        best.x = std::move(x0);
        best.f = std::numeric_limits<double>::quiet_NaN();
    }
    return best;
}

}  // namespace vqc
