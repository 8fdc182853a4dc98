"""lyapcert: forced third-order vector ODE checker"""
