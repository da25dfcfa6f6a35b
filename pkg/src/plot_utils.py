'''
Description: This file contains plotting utility functions for the effort comparison and the simulations.
'''

import os
import argparse

import numpy as np
import pandas as pd

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import seaborn as sns
plt.rc('text', usetex=False)
plt.rcParams['axes.labelsize']=16

def plot_effort_curve(df, crossovers, out_dir):
    df_long = df.melt(id_vars='delta', value_vars=['J1_literal', 'J1_shifted', 'J2'], var_name='norm', value_name='value')
    labels = {'J1_literal': 'Unilateral (weight $\\xi$)', 'J1_shifted': 'Unilateral (weight $\\xi+L$)', 'J2': 'Bilateral'}
    df_long['norm'] = df_long['norm'].map(labels)

    #plot lines
    sns.lineplot(data=df_long, x='delta', y='value', hue='norm', style='norm', markers=True, dashes=True)
    for variant, delta in (crossovers or {}).items():
        if delta is not None:
            plt.axvline(delta, color='grey', linestyle=':', linewidth=1)
            plt.text(delta, plt.ylim()[1]*0.9, ' $\\delta^*$={:.3f}'.format(delta), color='grey')

    #set axes labels
    plt.yscale('log')
    plt.xlabel("$\\delta = L\\sqrt{\\lambda/\\epsilon}$")
    plt.ylabel("$L^1$ norm of the gains")
    plt.legend(loc='best', title='Control law')

    path = os.path.join(out_dir, 'effort_curve.png')
    plt.savefig(path, bbox_inches='tight')
    plt.clf()
    return path

def plot_norm_history(norms, out_dir, title=None, target_norms=None):
    plt.plot(norms['t'], norms['l2'], label='$\\|u\\|_2$', color='C0')
    plt.plot(norms['t'], norms['sup'], label='$\\|u\\|_\\infty$', color='C1', linestyle='--')
    if target_norms is not None:
        plt.plot(target_norms['t'], target_norms['l2'], label='$\\|w\\|_2$ (target)', color='C2', linestyle='-.')

    if (norms['l2'] > 0).all():
        plt.yscale('log')
    plt.xlabel("Time")
    plt.ylabel("Norm")
    if title:
        plt.title(title)
    plt.legend(loc='best')

    path = os.path.join(out_dir, 'norm_history.png')
    plt.savefig(path, bbox_inches='tight')
    plt.clf()
    return path

def main():
    parser = argparse.ArgumentParser()
    parser.add_argument('-results_dir', type=str, default='./results', help='directory holding compare/ and simulate/ outputs')
    parser.add_argument('-effort_curve', type=bool, default=False)
    parser.add_argument('-norm_history', type=bool, default=False)
    args = parser.parse_args()

    #read in results file
    if args.effort_curve:
        df_results = pd.read_csv('{}/compare/effort_curve.csv'.format(args.results_dir), float_precision='round_trip')
        plot_effort_curve(df_results, None, '{}/compare'.format(args.results_dir))

    if args.norm_history:
        df_results = pd.read_csv('{}/simulate/trajectory.csv'.format(args.results_dir), float_precision='round_trip')
        snapshots = df_results.groupby('t')
        norms = pd.DataFrame({'t': list(snapshots.groups), 'l2': snapshots['value'].apply(lambda v: np.sqrt(np.mean(v**2))).values,
                              'sup': snapshots['value'].apply(lambda v: np.max(np.abs(v))).values})
        plot_norm_history(norms, '{}/simulate'.format(args.results_dir), title='RMS over all fields')

if __name__ == '__main__':
    main()
