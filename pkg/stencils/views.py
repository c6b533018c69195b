from django.http import HttpResponse, HttpResponseBadRequest
from django.views.generic import ListView, View

from . import perfmodel
from .bench import report
from .forms import ModelQueryForm
from .models import BenchResult

CONTENT_TYPES = {'csv': 'text/csv', 'json': 'application/json'}


class ResultListView(ListView):
    model = BenchResult

    def get_queryset(self):
        queryset = super().get_queryset()
        variant = self.request.GET.get('variant')
        if variant:
            queryset = queryset.filter(variant=variant)
        return queryset

    def render_to_response(self, context, **response_kwargs):
        fmt = self.request.GET.get('format', 'csv')
        if fmt not in CONTENT_TYPES:
            return HttpResponseBadRequest(f'unknown format {fmt!r}')
        return HttpResponse(report(context['object_list'], fmt), content_type=CONTENT_TYPES[fmt])


class ModelTableView(View):
    def get(self, request, *args, **kwargs):
        form = ModelQueryForm(request.GET)
        if not form.is_valid():
            return HttpResponseBadRequest(form.errors.as_text())
        if form.cleaned_data['kind'] == 'speedup':
            body = perfmodel.speedup_csv(perfmodel.TEAM_SIZES, perfmodel.UPDATES)
        else:
            body = perfmodel.halo_csv(perfmodel.HALO_SIZES, perfmodel.HALO_WIDTHS, sides=form.cleaned_data['sides'])
        return HttpResponse(body, content_type='text/csv')
